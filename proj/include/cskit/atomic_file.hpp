#pragma once

#include <filesystem>
#include <fstream>
#include <string_view>

namespace cskit {

// Output written to a sibling temp file and renamed into place by commit().
// Dropping an uncommitted AtomicFile removes the temp file, so a failed run
// leaves no partial output behind.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path path);
  ~AtomicFile();
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  std::ostream& stream() { return out_; }
  const std::filesystem::path& path() const { return path_; }
  // Flushes, closes and renames. Throws IoError on failure.
  void commit();

 private:
  std::filesystem::path path_;
  std::filesystem::path temp_;
  std::ofstream out_;
  bool committed_ = false;
};

void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace cskit
