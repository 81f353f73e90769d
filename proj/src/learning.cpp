#include "hyperrank/learning.hpp"

#include "hyperrank/error.hpp"

#include <json.hpp>

#include <cmath>
#include <numeric>
#include <ostream>

namespace hyperrank {

WeightState WeightState::uniform(std::size_t n, double kappa, double mu) {
    if (n == 0) throw InvalidInput("weight vector must be non-empty");
    WeightState s;
    s.w.assign(n, 1.0 / double(n));
    s.kappa = kappa;
    s.mu = mu;
    return s;
}

void WeightState::validate() const {
    if (w.empty()) throw InvalidInput("weight vector must be non-empty");
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw InvalidInput("kappa must be >= 0");
    if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidInput("mu must be > 0");
    double sum = 0.0;
    for (double x : w) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidInput("weights must be finite and >= 0");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw InvalidInput("weights must sum to 1");
    for (std::size_t j : active_set)
        if (j >= w.size() || w[j] != 0.0) throw InvalidInput("clamped weights must be exactly 0");
}

ActiveConstraints active_constraints(const WeightState& state, std::span<const double> grad) {
    if (grad.size() != state.w.size()) throw InvalidInput("gradient length does not match the weights");
    const std::size_t n_free = state.w.size() - state.active_set.size();
    if (n_free == 0) throw NumericalFailure("every weight is clamped: degenerate simplex");
    double mean = 0.0;
    for (std::size_t e = 0; e < grad.size(); ++e)
        if (!state.active_set.contains(e)) mean += grad[e];
    mean /= double(n_free);

    ActiveConstraints c;
    c.c1 = -mean;
    for (std::size_t j : state.active_set) {
        c.clamped.push_back(j);
        c.multipliers.push_back(-grad[j] - c.c1);
    }
    return c;
}

namespace {

// Entries (h_e^T Dv^-1/2 f)^2 / delta(e) for every hyperedge.
Vector edge_energies(const HypergraphModel& hg, std::span<const double> w, std::span<const double> f) {
    if (f.size() != hg.vertex_count()) throw InvalidInput("ranking vector length does not match the vertex count");
    const auto d = degrees(hg, w);
    const auto& ht = hg.members();
    Vector out(ht.rows());
    for (std::size_t e = 0; e < ht.rows(); ++e) {
        double s = 0.0;
        for (std::size_t v : ht.row_cols(e)) s += f[v] / std::sqrt(d.vertex[v]);
        out[e] = s * s / d.edge[e];
    }
    return out;
}

}  // namespace

double objective(const WeightState& state, std::span<const double> f, const HypergraphModel& hg) {
    const auto sys = build_adjacency(hg, state.w);
    return laplacian_quadratic(sys, f) + state.kappa * dot(state.w, state.w);
}

Vector gradient_frozen(const WeightState& state, std::span<const double> f, const HypergraphModel& hg) {
    auto g = edge_energies(hg, state.w, f);
    for (std::size_t e = 0; e < g.size(); ++e) g[e] = -g[e] + 2.0 * state.kappa * state.w[e];
    return g;
}

double frozen_objective(const WeightState& frozen, std::span<const double> w, std::span<const double> f,
                        const HypergraphModel& hg) {
    if (w.size() != frozen.w.size()) throw InvalidInput("weight vector length mismatch");
    const auto energy = edge_energies(hg, frozen.w, f);
    double p = dot(f, f) + frozen.kappa * dot(w, w);
    for (std::size_t e = 0; e < w.size(); ++e) p -= w[e] * energy[e];
    return p;
}

WeightState steepest_descent_step(const WeightState& state, std::span<const double> grad) {
    const auto c = active_constraints(state, grad);
    WeightState next = state;
    auto& w = next.w;
    for (std::size_t e = 0; e < w.size(); ++e) {
        if (state.active_set.contains(e)) continue;
        w[e] -= state.mu * (grad[e] + c.c1);
    }

    // Clamp negatives and push the excess mass back onto the free coordinates
    // until no coordinate is negative.
    for (;;) {
        bool clamped = false;
        for (std::size_t e = 0; e < w.size(); ++e)
            if (w[e] < 0.0) {
                w[e] = 0.0;
                next.active_set.insert(e);
                clamped = true;
            }
        const std::size_t n_free = w.size() - next.active_set.size();
        if (n_free == 0) throw NumericalFailure("every weight is clamped: degenerate simplex");
        double sum = 0.0;
        for (double x : w) sum += x;
        const double shift = (sum - 1.0) / double(n_free);
        for (std::size_t e = 0; e < w.size(); ++e)
            if (!next.active_set.contains(e)) w[e] -= shift;
        if (!clamped && shift == 0.0) break;
        bool negative = false;
        for (double x : w) negative |= x < 0.0;
        if (!negative) break;
    }
    for (std::size_t j : next.active_set) w[j] = 0.0;
    return next;
}

LearnResult learn_weights(const HypergraphModel& hg, std::span<const double> f, const WeightState& w0,
                          std::size_t steps, const LearnOptions& opts) {
    if (steps == 0) throw InvalidInput("learn_weights: steps must be >= 1");
    w0.validate();

    LearnResult out;
    out.state = w0;
    double current = objective(out.state, f, hg);
    out.trace.push_back({0, current, out.state.active_set.size(), out.state.mu, true});

    bool stalled = false;
    for (std::size_t step = 1; step <= steps; ++step) {
        // A step that failed at every step size leaves the state untouched, so
        // every later step would fail the same way.
        if (stalled) {
            out.trace.push_back({step, current, out.state.active_set.size(), out.state.mu, false});
            continue;
        }
        const auto grad = gradient_frozen(out.state, f, hg);
        const double mu_before = out.state.mu;
        bool accepted = false;
        for (std::size_t attempt = 0; attempt <= opts.max_halvings; ++attempt) {
            auto candidate = steepest_descent_step(out.state, grad);
            if (!find_isolated_vertex(hg, candidate.w)) {
                const double value = objective(candidate, f, hg);
                if (std::isfinite(value) && value <= current) {
                    out.state = std::move(candidate);
                    current = value;
                    accepted = true;
                    break;
                }
            }
            out.state.mu *= 0.5;
        }
        if (!accepted) {
            out.state.mu = mu_before;
            stalled = true;
        }
        out.trace.push_back({step, current, out.state.active_set.size(), out.state.mu, accepted});
    }
    return out;
}

void write_trace_jsonl(std::ostream& out, const std::vector<TraceEntry>& trace) {
    for (const auto& t : trace) {
        nlohmann::json j{{"step", t.step}, {"objective", t.objective}, {"n_active", t.n_active}, {"mu", t.mu}};
        out << j.dump() << '\n';
    }
}

}  // namespace hyperrank
