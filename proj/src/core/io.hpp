#pragma once
// Text I/O for scenes, templates and match files.
//
// Scene files:  header line `# width=<W> height=<H> k=<K>` followed by one
// point per line, `<id> <x> <y> <d_1> ... <d_K>`.  Files without the header
// are read in legacy mode (bare `x y` rows) and take their extent from the
// caller.  Template files are scene files with an extra `# order: i0 i1 ...`
// line.  Match files hold `<template_index> <target_index>` rows.

#include <string>

#include "core/types.hpp"

namespace iso {

// legacy_width/height are used only when the file lacks a header; pass <= 0
// to reject legacy files.
Scene load_scene(const std::string& path, double legacy_width = 0.0, double legacy_height = 0.0);
void save_scene(const Scene& scene, const std::string& path);

TemplateShape load_template(const std::string& path, double legacy_width = 0.0,
                            double legacy_height = 0.0);
void save_template(const TemplateShape& tpl, const std::string& path);

// Every template index in [0, n_template) must appear exactly once.
Assignment load_matches(const std::string& path, std::size_t n_template, std::size_t n_target);
void save_matches(const Assignment& a, const std::string& path, const std::string& comment = "");

} // namespace iso
