#include "doorway/common.hpp"

namespace doorway {

std::string_view toString(Side s) { return s == Side::Left ? "Left" : "Right"; }

}  // namespace doorway
