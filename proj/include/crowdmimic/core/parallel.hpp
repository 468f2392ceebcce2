// Copyright 2026 The Crowdmimic Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <exception>
#include <thread>
#include <vector>

namespace crowdmimic {

/// Runs fn(i) for i in [0, n) across up to `workers` threads, each worker
/// owning a contiguous shard. Callers store per-index results and reduce
/// them in index order afterwards, so the outcome does not depend on the
/// worker count or scheduling.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  if (n == 0) return;
  std::size_t w = static_cast<std::size_t>(workers < 1 ? 1 : workers);
  if (w > n) w = n;
  if (w == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(w);
  for (std::size_t t = 0; t < w; ++t) {
    std::size_t lo = n * t / w;
    std::size_t hi = n * (t + 1) / w;
    threads.emplace_back([&, lo, hi, t]() {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (std::thread& th : threads) th.join();
  for (std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace crowdmimic
