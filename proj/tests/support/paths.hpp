#pragma once

#include <filesystem>
#include <string>

namespace testing_support {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(CSKIT_FIXTURES_DIR) / name;
}

inline std::filesystem::path golden(const std::string& name) {
  return std::filesystem::path(CSKIT_GOLDEN_DIR) / name;
}

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string slurp(const std::filesystem::path& p);
void spit(const std::filesystem::path& p, const std::string& content);

}  // namespace testing_support
