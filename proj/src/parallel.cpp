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

#include "slidoc/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace slidoc
{

    int thread_count()
    {
        if (const char *env = std::getenv("SLIDOC_THREADS"))
        {
            const int v = std::atoi(env);
            if (v > 0)
            {
                return v;
            }
        }
        return std::max(1u, std::thread::hardware_concurrency());
    }

    void parallel_for(std::size_t count, const std::function<void(std::size_t)> &body)
    {
        const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(thread_count()));
        if (workers <= 1)
        {
            for (std::size_t i = 0; i < count; ++i)
            {
                body(i);
            }
            return;
        }
        std::vector<std::exception_ptr> errors(count);
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
        {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < count; i += workers)
                {
                    try
                    {
                        body(i);
                    }
                    catch (...)
                    {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (auto &t : pool)
        {
            t.join();
        }
        for (auto &e : errors)
        {
            if (e)
            {
                std::rethrow_exception(e);
            }
        }
    }

} // namespace slidoc
