#pragma once

#include <string>
#include <vector>

#include "skelbench/types.hpp"

namespace skelbench {

struct SyntheticShape {
  std::string id;  ///< "<class>-<n>"
  std::string class_name;
  BinaryImage image;
};

/// Fixed test corpus of 21 simply connected shapes in seven classes of three
/// (ellipses, rectangles, rounded bars, crosses, stars, triangles, blobs),
/// drawn on a size x size canvas with a longest extent of size - 16 pixels.
std::vector<SyntheticShape> synthetic_corpus(int size = 256);

/// 100 x 40 axis-aligned rectangle, optionally with a one-pixel bump in the
/// middle of the top side, centered on a size x size canvas.
BinaryImage rectangle_shape(int size = 256, bool bump = false);

}  // namespace skelbench
