#include "subspace_ot/util.hpp"

#include <cstdlib>
#include <string>

namespace sot {

unsigned resolve_thread_cap(int flag_value) {
  if (flag_value > 0) return static_cast<unsigned>(flag_value);
  if (const char* env = std::getenv("SUBSPACE_OT_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return static_cast<unsigned>(parsed);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

}  // namespace sot
