#include "prkit/parallel.hpp"

#include <cstdlib>
#include <string>

namespace prkit {

int workers_from_env() {
  const char* text = std::getenv("PRKIT_WORKERS");
  if (!text || !*text) return 1;
  try {
    return std::max(1, std::stoi(text));
  } catch (const std::exception&) {
    return 1;
  }
}

}  // namespace prkit
