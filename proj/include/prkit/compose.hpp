#pragma once

#include "prkit/image.hpp"

namespace prkit {

/// Convex per-pixel mix: alpha * target + (1 - alpha) * layer.
Image alpha_blend(const Image& target, const Image& layer, const AlphaMap& alpha);

/// Keeps `source` where the mask is 0 and takes `prediction` where it is 1.
Image compose_masked(const Image& source, const Image& prediction, const Mask& mask);

/// Zeroes every channel of the masked pixels (the hole value is black).
Image subtract_person(const Image& source, const Mask& mask);

/// Chebyshev dilation: a bit is set iff some input bit lies within `radius`
/// in both x and y.
Mask dilate(const Mask& mask, int radius);

}  // namespace prkit
