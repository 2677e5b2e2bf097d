#pragma once
// Fixed-baseline frame pairing for landmark sequences stored as one legacy
// "x y" file per frame (the classic toy-house tracking sequence layout).

#include <array>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace iso::bench {

// Every regular file in the directory, sorted by filename, parsed as one
// frame.  The files carry no extents, so the image size is supplied here.
std::vector<Scene> load_house_dir(const std::string& dir, double width = 512.0,
                                  double height = 480.0);

// All pairs (frame f, frame f+baseline), ground truth = landmark identity,
// template order = landmark file order.  Shape Context descriptors are
// computed for any frame that lacks them.
std::vector<MatchInstance> house_pairs(const std::vector<Scene>& frames, int baseline);

// First third of the pair list (by position) for training, second for
// validation, last for testing.
std::array<std::vector<MatchInstance>, 3> split_thirds(std::vector<MatchInstance> pairs);

} // namespace iso::bench
