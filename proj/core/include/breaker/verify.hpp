/*
 * Copyright 2026 Breaker Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace breaker {

// Test-only fault injection to prove the verification suite can fail.
enum class InjectFault {
  kNone,
  kClusterGradSign,  // flips the network's centroid gradient before comparing
};

struct GradientCheck {
  std::string group;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool relative = true;  // false: absolute difference
  bool pass = false;
};

struct GradientSuite {
  std::vector<GradientCheck> checks;
  bool all_pass = true;
};

// Layer primitives against central finite differences (relative, 1e-4, ten
// seeded points each); network clustering gradients against the analytic
// formulas (absolute, 1e-8) and against finite differences of the KL loss
// (absolute, 1e-6); the full training loss over every parameter group
// against finite differences (relative, 1e-4).
GradientSuite run_gradient_suite(std::uint64_t seed,
                                 InjectFault fault = InjectFault::kNone);

}  // namespace breaker
