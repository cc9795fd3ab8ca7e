#pragma once

#include <cstddef>
#include <cstdint>

namespace testing_support {

struct GradCheck {
  double worst = 0;  // max relative error over checked parameters
  std::size_t checked = 0;
  std::size_t skipped = 0;  // step crossed a ReLU kink
};

// Central-difference check of every parameter of a random network on one
// random batch, both drawn from `seed`.
GradCheck gradient_check(std::uint64_t seed);

}  // namespace testing_support
