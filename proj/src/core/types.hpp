#pragma once

#include <cstdint>

namespace patchdb {

using Index = std::int64_t;

}  // namespace patchdb
