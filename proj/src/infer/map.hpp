#pragma once
// MAP assignment over a loop of third-order cliques.
//
// map_loopy:       sequential max-sum message sweeps around the loop in both
//                  directions; per-clique belief decode.  When the decoded
//                  maximisers disagree on a shared node the routine falls
//                  back to map_conditioned, so the returned assignment is
//                  exact either way.
// map_conditioned: conditions on the joint state of nodes (0, 1), which cuts
//                  the loop into a chain solved by dynamic programming.
//                  Always exact; O(n * p^5).
// map_bruteforce:  exhaustive enumeration (guarded by a state-count limit).
//
// Ties everywhere resolve to the lexicographically smallest tuple of
// candidate-list positions.  Templates with fewer than 4 points degenerate
// the clique loop and are handled by enumeration in all three routines.

#include "infer/tables.hpp"

namespace iso::infer {

struct InferenceResult {
  Assignment assignment;  // target point indices, one per template point
  double objective = 0.0; // sum of clique table entries at the assignment
  int iterations = 0;     // message sweeps run (0 for the exact routines)
  bool converged = true;  // loopy only: message change fell below tol
};

struct LoopyOptions {
  int max_iters = 20;
  double tol = 1e-9;
  bool force_all_iters = false; // run exactly max_iters sweeps (timing runs)
  bool exact_fallback = true;   // repair inconsistent decodes via map_conditioned
  bool exact = false;           // skip message passing, decode with map_conditioned
};

InferenceResult map_loopy(const CliqueTableSet& tables, const LoopyOptions& opts = {});
InferenceResult map_loopy(const CliqueTableSet& tables, int max_iters, double tol = 1e-9);

InferenceResult map_conditioned(const CliqueTableSet& tables);

InferenceResult map_bruteforce(const CliqueTableSet& tables);

// Sum of clique table entries under an assignment given in target indices.
// Every entry of y must be a candidate of its node.
double evaluate(const CliqueTableSet& tables, const Assignment& y);

// Runs exactly `sweeps` full message sweeps and returns a checksum; used to
// time the message passing in isolation.
double timed_sweeps(const CliqueTableSet& tables, int sweeps);

} // namespace iso::infer
