/*
 Copyright 2026 The slidoc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef SLIDOC_PARALLEL_HPP
#define SLIDOC_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace slidoc
{

    /// Worker count: SLIDOC_THREADS if set and positive, else the hardware concurrency.
    int thread_count();

    /// Runs body(i) for i in [0, count) on up to thread_count() threads with a
    /// static partition. Each index is handled exactly once, so results written
    /// to slot i are independent of the thread count. The first exception thrown
    /// (lowest index) is rethrown on the calling thread.
    void parallel_for(std::size_t count, const std::function<void(std::size_t)> &body);

} // namespace slidoc

#endif // SLIDOC_PARALLEL_HPP
