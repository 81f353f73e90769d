#pragma once

#include "hyperrank/hypergraph.hpp"
#include "hyperrank/linalg.hpp"

#include <cstddef>
#include <iosfwd>
#include <set>
#include <span>
#include <vector>

namespace hyperrank {

inline constexpr double default_kappa = 0.1;
inline constexpr double default_mu = 0.05;

// Hyperedge weights on the probability simplex plus the learning parameters.
// Indices in active_set are clamped to exactly zero.
struct WeightState {
    Vector w;
    double kappa = default_kappa;
    double mu = default_mu;
    std::set<std::size_t> active_set;

    static WeightState uniform(std::size_t n, double kappa = default_kappa, double mu = default_mu);
    // Throws InvalidInput unless w is a valid simplex point consistent with active_set.
    void validate() const;
};

// Multipliers of S = P + c1 (1^T w - 1) + sum_j c_j w_{nu_j} that make the
// gradient of S vanish along the constraint directions.
struct ActiveConstraints {
    double c1 = 0.0;
    std::vector<std::size_t> clamped;
    std::vector<double> multipliers;  // one per clamped index
};

ActiveConstraints active_constraints(const WeightState& state, std::span<const double> grad);

// f^T L(w) f + kappa ||w||^2 with the adjacency rebuilt from w.
double objective(const WeightState& state, std::span<const double> f, const HypergraphModel& hg);

// Gradient of the objective with D_v and D_e frozen at the current w.
Vector gradient_frozen(const WeightState& state, std::span<const double> f, const HypergraphModel& hg);

// Value of the frozen objective at `w` with degrees taken from `frozen`.
double frozen_objective(const WeightState& frozen, std::span<const double> w, std::span<const double> f,
                        const HypergraphModel& hg);

WeightState steepest_descent_step(const WeightState& state, std::span<const double> grad);

struct TraceEntry {
    std::size_t step = 0;
    double objective = 0.0;
    std::size_t n_active = 0;
    double mu = 0.0;
    bool accepted = true;

    friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct LearnResult {
    WeightState state;
    // Entry 0 is the starting point; one entry per step after that.
    std::vector<TraceEntry> trace;
};

struct LearnOptions {
    // Give up on a step (keep w) after this many consecutive halvings of mu.
    std::size_t max_halvings = 50;
};

LearnResult learn_weights(const HypergraphModel& hg, std::span<const double> f, const WeightState& w0,
                          std::size_t steps, const LearnOptions& opts = {});

void write_trace_jsonl(std::ostream& out, const std::vector<TraceEntry>& trace);

}  // namespace hyperrank
