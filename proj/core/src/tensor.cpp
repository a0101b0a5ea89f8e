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

#include "breaker/tensor.hpp"

#include <cmath>
#include <sstream>

#include "breaker/error.hpp"

namespace breaker {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << " x ";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Tensor::Tensor(std::vector<std::size_t> s)
    : shape(std::move(s)), values(shape_numel(shape), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> s, std::vector<double> v)
    : shape(std::move(s)), values(std::move(v)) {
  if (shape_numel(shape) != values.size()) {
    throw ConfigError("tensor shape " + shape_str(shape) + " does not match " +
                      std::to_string(values.size()) + " values");
  }
}

Tensor Tensor::vec(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor({n}, std::move(v));
}

Tensor Tensor::matrix(std::size_t r, std::size_t c, std::vector<double> v) {
  return Tensor({r, c}, std::move(v));
}

bool Tensor::all_finite() const {
  for (double x : values) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Tensor& ParamSet::add(const std::string& name, Tensor t) {
  if (index_.count(name)) {
    throw ConfigError("duplicate parameter name: " + name);
  }
  index_.emplace(name, items_.size());
  items_.emplace_back(name, std::move(t));
  return items_.back().second;
}

bool ParamSet::has(const std::string& name) const {
  return index_.count(name) != 0;
}

Tensor& ParamSet::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
  return items_[it->second].second;
}

const Tensor& ParamSet::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
  return items_[it->second].second;
}

std::size_t ParamSet::total_values() const {
  std::size_t n = 0;
  for (const auto& [name, t] : items_) n += t.size();
  return n;
}

Tensor& GradMap::slot(const std::string& name,
                      const std::vector<std::size_t>& shape) {
  auto it = grads_.find(name);
  if (it == grads_.end()) {
    it = grads_.emplace(name, Tensor(shape)).first;
  } else if (it->second.shape != shape) {
    throw ConfigError("gradient shape mismatch for " + name + ": " +
                      shape_str(it->second.shape) + " vs " + shape_str(shape));
  }
  return it->second;
}

void GradMap::accumulate(const std::string& name, const Tensor& g) {
  Tensor& dst = slot(name, g.shape);
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
}

const Tensor* GradMap::find(const std::string& name) const {
  auto it = grads_.find(name);
  return it == grads_.end() ? nullptr : &it->second;
}

}  // namespace breaker
