/*
 * Copyright 2025 The seraser authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SERASER_GRADCHECK_HPP_
#define SERASER_GRADCHECK_HPP_

#include <cstdint>
#include <vector>

#include "seraser/toy_backend.hpp"

namespace seraser {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::vector<double> per_pair;
};

// Compares the backend's analytic prompt gradients against central finite
// differences of the public objective-value path, over num_pairs random
// (prompt, images) combinations of the combined erase + keep loss.
GradCheckResult run_gradient_check(const ToyBackend& backend, int num_pairs,
                                   std::uint64_t seed, double fd_step = 1e-4);

}  // namespace seraser

#endif  // SERASER_GRADCHECK_HPP_
