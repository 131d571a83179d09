#include "perturbopt/harness/threads.hpp"

#include <charconv>
#include <cstdlib>
#include <string>
#include <string_view>
#include <thread>

#include "perturbopt/errors.hpp"

namespace perturbopt::harness {

unsigned parse_worker_count(const char* value, unsigned hardware) {
  const unsigned hw = hardware == 0 ? 1 : hardware;
  if (value == nullptr) return hw;
  const std::string_view s(value);
  if (s.empty()) return hw;
  unsigned n = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw ValidationError("PERTURBOPT_THREADS must be a non-negative integer, got '" + std::string(s) + "'");
  }
  return n == 0 ? hw : n;
}

unsigned worker_count() {
  return parse_worker_count(std::getenv("PERTURBOPT_THREADS"), std::thread::hardware_concurrency());
}

}  // namespace perturbopt::harness
