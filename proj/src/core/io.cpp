#include "core/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace iso {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t lineno, const std::string& msg) {
  fail(ErrorCode::parse, path + ":" + std::to_string(lineno) + ": " + msg);
}

double parse_double(const std::string& tok, const std::string& path, std::size_t lineno) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size())
    parse_fail(path, lineno, "expected a number, got '" + tok + "'");
  return v;
}

std::size_t parse_index(const std::string& tok, const std::string& path, std::size_t lineno) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size() || tok.empty() || tok[0] == '-')
    parse_fail(path, lineno, "expected a non-negative index, got '" + tok + "'");
  return static_cast<std::size_t>(v);
}

std::string filename_stem(const std::string& path) {
  const auto slash = path.find_last_of("/\\");
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = name.find_last_of('.');
  if (dot != std::string::npos && dot > 0) name = name.substr(0, dot);
  return name;
}

// Reads the scene and, when present, the `# order:` line (for templates).
Scene load_scene_impl(const std::string& path, double legacy_w, double legacy_h,
                      std::vector<std::size_t>* order_out) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open scene file '" + path + "'");

  Scene scene;
  scene.id = filename_stem(path);

  bool have_header = false;
  long declared_k = -1; // -1: infer from the first point row
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto toks = split_ws(line);
    if (toks.empty()) continue;

    if (toks[0][0] == '#') {
      // Header, order line, or plain comment.
      std::string rest = line.substr(line.find('#') + 1);
      auto ctoks = split_ws(rest);
      if (!ctoks.empty() && ctoks[0] == "order:") {
        if (order_out) {
          order_out->clear();
          for (std::size_t i = 1; i < ctoks.size(); ++i)
            order_out->push_back(parse_index(ctoks[i], path, lineno));
        }
        continue;
      }
      bool saw_kv = false;
      for (const auto& t : ctoks) {
        const auto eq = t.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = t.substr(0, eq), val = t.substr(eq + 1);
        if (key == "width") { scene.width = parse_double(val, path, lineno); saw_kv = true; }
        else if (key == "height") { scene.height = parse_double(val, path, lineno); saw_kv = true; }
        else if (key == "k") { declared_k = static_cast<long>(parse_index(val, path, lineno)); saw_kv = true; }
      }
      if (saw_kv) have_header = true;
      continue;
    }

    if (have_header) {
      if (toks.size() < 3) parse_fail(path, lineno, "expected '<id> <x> <y> ...' point row");
      if (declared_k < 0) declared_k = static_cast<long>(toks.size()) - 3;
      if (static_cast<long>(toks.size()) != 3 + declared_k)
        parse_fail(path, lineno, "inconsistent descriptor dimension: row has " +
                                     std::to_string(toks.size() - 3) + " values, expected " +
                                     std::to_string(declared_k));
      scene.point_ids.push_back(toks[0]);
      Point2 p{parse_double(toks[1], path, lineno), parse_double(toks[2], path, lineno)};
      scene.points.push_back(p);
      if (declared_k > 0) {
        std::vector<double> d(static_cast<std::size_t>(declared_k));
        for (long i = 0; i < declared_k; ++i)
          d[static_cast<std::size_t>(i)] = parse_double(toks[3 + static_cast<std::size_t>(i)], path, lineno);
        scene.descriptors.push_back(std::move(d));
      }
    } else {
      // Legacy mode: bare `x y` rows, extent supplied by the caller.
      if (toks.size() != 2)
        parse_fail(path, lineno, "file has no '# width= height=' header and row is not 'x y'");
      if (!(legacy_w > 0.0) || !(legacy_h > 0.0))
        fail(ErrorCode::invalid, "scene file '" + path +
                                     "' is in legacy 'x y' format; supply the image width and height");
      scene.width = legacy_w;
      scene.height = legacy_h;
      scene.point_ids.push_back(std::to_string(scene.points.size()));
      scene.points.push_back(
          Point2{parse_double(toks[0], path, lineno), parse_double(toks[1], path, lineno)});
    }
  }
  scene.validate();
  return scene;
}

} // namespace

Scene load_scene(const std::string& path, double legacy_width, double legacy_height) {
  return load_scene_impl(path, legacy_width, legacy_height, nullptr);
}

void save_scene(const Scene& scene, const std::string& path) {
  scene.validate();
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "# width=" << num(scene.width) << " height=" << num(scene.height)
      << " k=" << scene.descriptor_dim() << "\n";
  for (std::size_t i = 0; i < scene.size(); ++i) {
    out << (scene.point_ids.empty() ? std::to_string(i) : scene.point_ids[i]) << " "
        << num(scene.points[i].x) << " " << num(scene.points[i].y);
    if (scene.has_descriptors())
      for (double v : scene.descriptors[i]) out << " " << num(v);
    out << "\n";
  }
  if (!out) fail(ErrorCode::io, "failed writing scene to '" + path + "'");
}

TemplateShape load_template(const std::string& path, double legacy_width, double legacy_height) {
  TemplateShape tpl;
  std::vector<std::size_t> order;
  tpl.scene = load_scene_impl(path, legacy_width, legacy_height, &order);
  if (order.empty())
    fail(ErrorCode::parse, "template file '" + path + "' lacks an '# order: i0 i1 ...' line");
  tpl.order = std::move(order);
  tpl.validate();
  return tpl;
}

void save_template(const TemplateShape& tpl, const std::string& path) {
  tpl.validate();
  save_scene(tpl.scene, path);
  std::ofstream out(path, std::ios::app);
  if (!out) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  out << "# order:";
  for (std::size_t idx : tpl.order) out << " " << idx;
  out << "\n";
  if (!out) fail(ErrorCode::io, "failed writing template to '" + path + "'");
}

Assignment load_matches(const std::string& path, std::size_t n_template, std::size_t n_target) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open match file '" + path + "'");
  std::vector<long> map(n_template, -1);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto toks = split_ws(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    if (toks.size() != 2)
      parse_fail(path, lineno, "expected '<template_index> <target_index>'");
    const std::size_t t = parse_index(toks[0], path, lineno);
    const std::size_t u = parse_index(toks[1], path, lineno);
    if (t >= n_template)
      parse_fail(path, lineno, "template index " + std::to_string(t) + " out of range (n=" +
                                   std::to_string(n_template) + ")");
    if (u >= n_target)
      parse_fail(path, lineno, "target index " + std::to_string(u) + " out of range (n=" +
                                   std::to_string(n_target) + ")");
    if (map[t] >= 0)
      parse_fail(path, lineno, "template index " + std::to_string(t) + " matched twice");
    map[t] = static_cast<long>(u);
  }
  Assignment a;
  a.map.resize(n_template);
  for (std::size_t t = 0; t < n_template; ++t) {
    if (map[t] < 0)
      fail(ErrorCode::parse, path + ": template index " + std::to_string(t) + " never matched");
    a.map[t] = static_cast<std::size_t>(map[t]);
  }
  return a;
}

void save_matches(const Assignment& a, const std::string& path, const std::string& comment) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  if (!comment.empty()) out << "# " << comment << "\n";
  for (std::size_t t = 0; t < a.size(); ++t) out << t << " " << a.map[t] << "\n";
  if (!out) fail(ErrorCode::io, "failed writing matches to '" + path + "'");
}

} // namespace iso
