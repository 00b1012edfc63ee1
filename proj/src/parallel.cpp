#include "gemnas/parallel.hpp"

namespace gemnas {

int default_worker_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) return 1;
  return static_cast<int>(std::min(hw, 8u));
}

}  // namespace gemnas
