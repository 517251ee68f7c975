/**
 * Copyright 2026 The KGUF Toolkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace kguf::log {
namespace {

std::atomic<int> g_level{1};
std::mutex g_mutex;

void emit(const char* tag, std::string_view msg) {
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << "[kguf " << tag << "] " << msg << '\n';
}

}  // namespace

void set_verbosity(int level) { g_level.store(level); }
int verbosity() { return g_level.load(); }

void warn(std::string_view msg) {
  if (g_level.load() >= 1) emit("warn", msg);
}
void info(std::string_view msg) {
  if (g_level.load() >= 2) emit("info", msg);
}
void debug(std::string_view msg) {
  if (g_level.load() >= 3) emit("debug", msg);
}

}  // namespace kguf::log
