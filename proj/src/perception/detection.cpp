#include "doorway/perception/detection.hpp"

#include <cmath>
#include <stdexcept>

namespace doorway {

StabilityWindow::StabilityWindow(std::size_t windowSize, double threshold) : ring_(windowSize, false) {
  if (windowSize == 0) throw std::invalid_argument("stability window must hold at least one frame");
  if (!(threshold > 0.0 && threshold <= 1.0)) throw std::invalid_argument("stability threshold must be in (0, 1]");
  // Tolerance absorbs binary representation error, e.g. 0.6 * 30.
  required_ = static_cast<std::size_t>(std::ceil(threshold * static_cast<double>(windowSize) - 1e-9));
}

void StabilityWindow::push(bool hit) {
  if (filled_ == ring_.size()) {
    if (ring_[head_]) --hits_;
  } else {
    ++filled_;
  }
  ring_[head_] = hit;
  if (hit) ++hits_;
  head_ = (head_ + 1) % ring_.size();
}

void StabilityWindow::clear() {
  std::fill(ring_.begin(), ring_.end(), false);
  head_ = filled_ = hits_ = 0;
}

std::vector<bool> StabilityWindow::pattern() const {
  std::vector<bool> out;
  out.reserve(filled_);
  const std::size_t start = (head_ + ring_.size() - filled_) % ring_.size();
  for (std::size_t k = 0; k < filled_; ++k) out.push_back(ring_[(start + k) % ring_.size()]);
  return out;
}

}  // namespace doorway
