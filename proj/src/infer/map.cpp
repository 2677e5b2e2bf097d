#include "infer/map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace iso::infer {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMaxBruteforceStates = 1e7;

void check_tables(const CliqueTableSet& ts) {
  if (ts.n < 3 || ts.t.size() != ts.n || ts.sizes.size() != ts.n)
    fail(ErrorCode::invalid, "malformed clique table set");
  for (std::size_t i = 0; i < ts.n; ++i) {
    const std::size_t want = ts.sizes[i] * ts.sizes[(i + 1) % ts.n] * ts.sizes[(i + 2) % ts.n];
    if (ts.sizes[i] == 0 || ts.t[i].size() != want)
      fail(ErrorCode::invalid, "clique table " + std::to_string(i) + " has wrong extent");
  }
}

double objective_at(const CliqueTableSet& ts, const std::vector<std::size_t>& pos) {
  double acc = 0.0;
  for (std::size_t i = 0; i < ts.n; ++i)
    acc += ts.at(i, pos[i], pos[(i + 1) % ts.n], pos[(i + 2) % ts.n]);
  return acc;
}

InferenceResult result_from_positions(const CliqueTableSet& ts,
                                      const std::vector<std::size_t>& pos, int iterations,
                                      bool converged) {
  InferenceResult r;
  r.assignment.map.resize(ts.n);
  for (std::size_t i = 0; i < ts.n; ++i) r.assignment.map[i] = ts.cands.lists[i][pos[i]];
  r.objective = objective_at(ts, pos);
  r.iterations = iterations;
  r.converged = converged;
  return r;
}

// Exhaustive search over candidate positions in lexicographic order; strict
// improvement keeps the lexicographically smallest optimum.
InferenceResult enumerate_all(const CliqueTableSet& ts) {
  double states = 1.0;
  for (std::size_t s : ts.sizes) states *= static_cast<double>(s);
  if (states > kMaxBruteforceStates)
    fail(ErrorCode::invalid, "state space too large to enumerate (" + std::to_string(states) +
                                 " assignments)");
  std::vector<std::size_t> pos(ts.n, 0), best(ts.n, 0);
  double best_val = kNegInf;
  while (true) {
    const double v = objective_at(ts, pos);
    if (v > best_val) { best_val = v; best = pos; }
    std::size_t k = ts.n;
    while (k > 0) {
      --k;
      if (++pos[k] < ts.sizes[k]) break;
      pos[k] = 0;
      if (k == 0) return result_from_positions(ts, best, 0, true);
    }
  }
}

} // namespace

double evaluate(const CliqueTableSet& ts, const Assignment& y) {
  check_tables(ts);
  if (y.size() != ts.n) fail(ErrorCode::dimension, "assignment size does not match table set");
  std::vector<std::size_t> pos(ts.n);
  for (std::size_t i = 0; i < ts.n; ++i) {
    const auto& l = ts.cands.lists[i];
    const auto it = std::find(l.begin(), l.end(), y.map[i]);
    if (it == l.end())
      fail(ErrorCode::invalid, "assignment target " + std::to_string(y.map[i]) +
                                   " is not a candidate of node " + std::to_string(i));
    pos[i] = static_cast<std::size_t>(it - l.begin());
  }
  return objective_at(ts, pos);
}

InferenceResult map_bruteforce(const CliqueTableSet& ts) {
  check_tables(ts);
  return enumerate_all(ts);
}

InferenceResult map_conditioned(const CliqueTableSet& ts) {
  check_tables(ts);
  const std::size_t n = ts.n;
  if (n < 4) return enumerate_all(ts); // cliques overlap fully, DP gains nothing

  const std::size_t P0 = ts.sizes[0], P1 = ts.sizes[1];
  double best_val = kNegInf;
  std::vector<std::size_t> best(n, 0), pos(n, 0);

  // B[i] over pair states (y_i, y_{i+1}) for i in [2, n-2]; scratch per condition.
  std::vector<std::vector<double>> B(n);
  for (std::size_t i = 2; i <= n - 2; ++i) B[i].assign(ts.sizes[i] * ts.sizes[i + 1], kNegInf);

  for (std::size_t alpha = 0; alpha < P0; ++alpha) {
    for (std::size_t beta = 0; beta < P1; ++beta) {
      // Tail cliques with y_0, y_1 substituted.
      {
        const std::size_t A = ts.sizes[n - 2], Bn = ts.sizes[n - 1];
        for (std::size_t a = 0; a < A; ++a)
          for (std::size_t b = 0; b < Bn; ++b)
            B[n - 2][a * Bn + b] = ts.at(n - 2, a, b, alpha) + ts.at(n - 1, b, alpha, beta);
      }
      for (std::size_t i = n - 3; i >= 2; --i) {
        const std::size_t A = ts.sizes[i], Bb = ts.sizes[i + 1], C = ts.sizes[i + 2];
        for (std::size_t a = 0; a < A; ++a)
          for (std::size_t b = 0; b < Bb; ++b) {
            double m = kNegInf;
            for (std::size_t c = 0; c < C; ++c) {
              const double v = ts.at(i, a, b, c) + B[i + 1][b * C + c];
              if (v > m) m = v;
            }
            B[i][a * Bb + b] = m;
          }
      }
      // Head: choose (y_2, y_3), lexicographically smallest maximiser.
      const std::size_t P2 = ts.sizes[2], P3 = ts.sizes[3];
      double head_best = kNegInf;
      std::size_t y2 = 0, y3 = 0;
      for (std::size_t a = 0; a < P2; ++a)
        for (std::size_t b = 0; b < P3; ++b) {
          const double v =
              ts.at(0, alpha, beta, a) + ts.at(1, beta, a, b) + B[2][a * P3 + b];
          if (v > head_best) { head_best = v; y2 = a; y3 = b; }
        }
      if (head_best > best_val) {
        best_val = head_best;
        pos[0] = alpha; pos[1] = beta; pos[2] = y2; pos[3] = y3;
        for (std::size_t i = 2; i <= n - 3; ++i) {
          // Smallest y_{i+2} achieving B[i] at the fixed (y_i, y_{i+1}).
          const std::size_t Bb = ts.sizes[i + 1], C = ts.sizes[i + 2];
          const double target = B[i][pos[i] * Bb + pos[i + 1]];
          for (std::size_t c = 0; c < C; ++c) {
            if (ts.at(i, pos[i], pos[i + 1], c) + B[i + 1][pos[i + 1] * C + c] == target) {
              pos[i + 2] = c;
              break;
            }
          }
        }
        best = pos;
      }
    }
  }
  return result_from_positions(ts, best, 0, true);
}

namespace {

struct LoopyState {
  std::vector<std::vector<double>> fwd; // fwd[i] over (cand_{i+1}, cand_{i+2})
  std::vector<std::vector<double>> bwd; // bwd[i] over (cand_i, cand_{i+1})

  explicit LoopyState(const CliqueTableSet& ts) {
    const std::size_t n = ts.n;
    fwd.resize(n);
    bwd.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      fwd[i].assign(ts.sizes[(i + 1) % n] * ts.sizes[(i + 2) % n], 0.0);
      bwd[i].assign(ts.sizes[i] * ts.sizes[(i + 1) % n], 0.0);
    }
  }

  // One full sweep (clockwise then counterclockwise), updating messages in
  // place so information travels the whole loop each sweep.  Returns the
  // largest entry change.
  double sweep(const CliqueTableSet& ts, std::vector<double>& scratch) {
    const std::size_t n = ts.n;
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t prev = (i + n - 1) % n;
      const std::size_t A = ts.sizes[i], B = ts.sizes[(i + 1) % n], C = ts.sizes[(i + 2) % n];
      scratch.assign(B * C, kNegInf);
      const std::vector<double>& in = fwd[prev]; // over (cand_i, cand_{i+1})
      const double* t = ts.t[i].data();
      for (std::size_t a = 0; a < A; ++a)
        for (std::size_t b = 0; b < B; ++b) {
          const double base = in[a * B + b];
          const double* row = t + (a * B + b) * C;
          double* out = scratch.data() + b * C;
          for (std::size_t c = 0; c < C; ++c) {
            const double v = row[c] + base;
            if (v > out[c]) out[c] = v;
          }
        }
      double mx = kNegInf;
      for (double v : scratch) mx = std::max(mx, v);
      std::vector<double>& dst = fwd[i];
      for (std::size_t e = 0; e < scratch.size(); ++e) {
        const double v = scratch[e] - mx;
        delta = std::max(delta, std::fabs(v - dst[e]));
        dst[e] = v;
      }
    }
    for (std::size_t ii = ts.n; ii-- > 0;) {
      const std::size_t next = (ii + 1) % n;
      const std::size_t A = ts.sizes[ii], B = ts.sizes[(ii + 1) % n], C = ts.sizes[(ii + 2) % n];
      scratch.assign(A * B, kNegInf);
      const std::vector<double>& in = bwd[next]; // over (cand_{i+1}, cand_{i+2})
      const double* t = ts.t[ii].data();
      for (std::size_t a = 0; a < A; ++a)
        for (std::size_t b = 0; b < B; ++b) {
          const double* row = t + (a * B + b) * C;
          const double* inr = in.data() + b * C;
          double m = kNegInf;
          for (std::size_t c = 0; c < C; ++c) m = std::max(m, row[c] + inr[c]);
          scratch[a * B + b] = m;
        }
      double mx = kNegInf;
      for (double v : scratch) mx = std::max(mx, v);
      std::vector<double>& dst = bwd[ii];
      for (std::size_t e = 0; e < scratch.size(); ++e) {
        const double v = scratch[e] - mx;
        delta = std::max(delta, std::fabs(v - dst[e]));
        dst[e] = v;
      }
    }
    return delta;
  }
};

} // namespace

InferenceResult map_loopy(const CliqueTableSet& ts, const LoopyOptions& opts) {
  check_tables(ts);
  if (opts.exact) return map_conditioned(ts);
  if (opts.max_iters < 1) fail(ErrorCode::invalid, "map_loopy needs max_iters >= 1");
  const std::size_t n = ts.n;
  if (n < 4) return enumerate_all(ts);

  LoopyState st(ts);
  std::vector<double> scratch;
  bool converged = false;
  int sweeps = 0;
  while (sweeps < opts.max_iters) {
    const double delta = st.sweep(ts, scratch);
    ++sweeps;
    if (!opts.force_all_iters && delta < opts.tol) { converged = true; break; }
  }

  // Belief decode: clique i's belief combines its table with both incoming
  // messages; take the lexicographically smallest argmax per clique.
  std::vector<std::size_t> arg_a(n), arg_b(n), arg_c(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t prev = (i + n - 1) % n, next = (i + 1) % n;
    const std::size_t A = ts.sizes[i], B = ts.sizes[next], C = ts.sizes[(i + 2) % n];
    double best = kNegInf;
    for (std::size_t a = 0; a < A; ++a)
      for (std::size_t b = 0; b < B; ++b) {
        const double base = st.fwd[prev][a * B + b];
        const double* row = ts.t[i].data() + (a * B + b) * C;
        const double* inr = st.bwd[next].data() + b * C;
        for (std::size_t c = 0; c < C; ++c) {
          const double v = row[c] + base + inr[c];
          if (v > best) { best = v; arg_a[i] = a; arg_b[i] = b; arg_c[i] = c; }
        }
      }
  }
  bool consistent = true;
  for (std::size_t i = 0; i < n && consistent; ++i)
    consistent = arg_b[i] == arg_a[(i + 1) % n] && arg_c[i] == arg_a[(i + 2) % n];

  if (!consistent && opts.exact_fallback) {
    InferenceResult r = map_conditioned(ts);
    r.iterations = sweeps;
    r.converged = converged;
    return r;
  }
  return result_from_positions(ts, arg_a, sweeps, converged);
}

InferenceResult map_loopy(const CliqueTableSet& ts, int max_iters, double tol) {
  LoopyOptions opts;
  opts.max_iters = max_iters;
  opts.tol = tol;
  return map_loopy(ts, opts);
}

double timed_sweeps(const CliqueTableSet& ts, int sweeps) {
  check_tables(ts);
  LoopyState st(ts);
  std::vector<double> scratch;
  double acc = 0.0;
  for (int s = 0; s < sweeps; ++s) acc += st.sweep(ts, scratch);
  return acc;
}

} // namespace iso::infer
