#pragma once

#include <array>

namespace expdnn::detail {

extern const std::array<std::array<double, 4>, 150> kIrisFeatures;
extern const std::array<int, 150> kIrisSpecies;

}  // namespace expdnn::detail
