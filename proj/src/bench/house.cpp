#include "bench/house.hpp"

#include <algorithm>
#include <filesystem>
#include <numeric>

#include "core/error.hpp"
#include "core/io.hpp"
#include "features/shape_context.hpp"

namespace iso::bench {

std::vector<Scene> load_house_dir(const std::string& dir, double width, double height) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) fail(ErrorCode::io, dir + " is not a readable directory");
  std::vector<fs::path> files;
  for (const fs::directory_entry& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  if (files.empty()) fail(ErrorCode::io, dir + " contains no frame files");
  std::sort(files.begin(), files.end());
  std::vector<Scene> frames;
  frames.reserve(files.size());
  for (const fs::path& f : files) frames.push_back(load_scene(f.string(), width, height));
  return frames;
}

std::vector<MatchInstance> house_pairs(const std::vector<Scene>& frames, int baseline) {
  if (frames.empty()) fail(ErrorCode::invalid, "no frames");
  if (baseline < 0) fail(ErrorCode::invalid, "baseline must be >= 0");
  if (static_cast<std::size_t>(baseline) >= frames.size())
    fail(ErrorCode::invalid, "baseline " + std::to_string(baseline) + " >= frame count " +
                                 std::to_string(frames.size()));
  const std::size_t n = frames.front().size();
  if (n < 3) fail(ErrorCode::invalid, "frames need at least 3 landmarks");
  for (const Scene& f : frames)
    if (f.size() != n) fail(ErrorCode::invalid, "frame " + f.id + " has a different landmark count");

  std::vector<Scene> ready = frames;
  for (Scene& f : ready) f = feat::ensure_descriptors(f, feat::ShapeContextConfig{});

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Assignment gt;
  gt.map = order;

  std::vector<MatchInstance> pairs;
  pairs.reserve(frames.size() - baseline);
  for (std::size_t f = 0; f + baseline < ready.size(); ++f) {
    MatchInstance inst;
    inst.tpl.scene = ready[f];
    inst.tpl.order = order;
    inst.target = ready[f + baseline];
    inst.ground_truth = gt;
    pairs.push_back(std::move(inst));
  }
  return pairs;
}

std::array<std::vector<MatchInstance>, 3> split_thirds(std::vector<MatchInstance> pairs) {
  const std::size_t m = pairs.size();
  if (m < 3) fail(ErrorCode::invalid, "need at least 3 pairs to split into thirds");
  std::array<std::vector<MatchInstance>, 3> out;
  const std::size_t a = m / 3, b = 2 * m / 3;
  for (std::size_t i = 0; i < m; ++i)
    out[i < a ? 0 : i < b ? 1 : 2].push_back(std::move(pairs[i]));
  return out;
}

} // namespace iso::bench
