#pragma once

// Finite-scale Lyapunov exponents
//   L'_N(A, omega) = int (1/N) ln ||A_N(x)|| dx
//   L_N(A, omega)  = L'_N of A / |det A|^{1/2} = L'_N - (1/2) int ln |det A|
// by quadrature, plus extrapolation tables and finite-scale continuity sweeps.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "qpcocycle/cocycle.hpp"
#include "qpcocycle/error.hpp"
#include "qpcocycle/parallel.hpp"
#include "qpcocycle/quadrature.hpp"

namespace qpc {

struct LEEstimate {
    std::int64_t N = 0;
    double value = 0.0;
    double excised_mass = 0.0;
    QuadratureSpec quad;
    std::optional<double> stderr_estimate;
};

template <MatrixFunction F>
std::vector<double> log_norm_samples(const Cocycle<F>& C, std::int64_t N, const NodeSet& nodes)
{
    std::vector<double> values(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t i) {
        values[i] = iterate_log_norm(C, N, nodes.point(i)).log_norm_avg;
    });
    return values;
}

template <MatrixFunction F>
LEEstimate L_prime_N(const Cocycle<F>& C, std::int64_t N, const QuadratureSpec& quad)
{
    require(N >= 1, ErrorKind::InvalidArgument, "N must be >= 1");
    const NodeSet nodes = make_nodes(quad, C.dim());
    const auto values = log_norm_samples(C, N, nodes);
    const SampleMean m = sample_mean(values, nodes);
    require(m.retained > 0, ErrorKind::AllSamplesSingular, "every quadrature node underflowed");
    return LEEstimate{N, m.value, m.excised_mass, quad, m.error};
}

template <MatrixFunction F>
LEEstimate L_N_renormalized(const Cocycle<F>& C, std::int64_t N, const QuadratureSpec& quad)
{
    return L_prime_N(renormalized(C), N, quad);
}

struct DetLogIntegral {
    double value = 0.0;
    double clipped_mass = 0.0;
    double error = 0.0;
};

/// int ln |det A(x)| dx with ln |det| clipped from below at ln(clip_floor).
template <MatrixFunction F>
DetLogIntegral det_log_integral(const F& A, const QuadratureSpec& quad)
{
    const NodeSet nodes = make_nodes(quad, A.dim());
    const double floor_log = std::log(quad.clip_floor);
    std::vector<double> values(nodes.size());
    std::vector<unsigned char> clipped(nodes.size(), 0);
    parallel_for(nodes.size(), [&](std::size_t i) {
        const double ad = std::abs(A(nodes.point(i)).det());
        if (!(ad >= quad.clip_floor)) {
            values[i] = floor_log;
            clipped[i] = 1;
        } else {
            values[i] = std::log(ad);
        }
    });
    const SampleMean m = sample_mean(values, nodes);
    DetLogIntegral out;
    out.value = m.value;
    out.error = m.error;
    std::size_t nclip = 0;
    for (auto c : clipped)
        nclip += c;
    out.clipped_mass = static_cast<double>(nclip) / static_cast<double>(nodes.size());
    require(nclip < nodes.size(), ErrorKind::IdenticallySingular,
            "det A vanishes at every quadrature node");
    return out;
}

struct Extrapolation {
    std::vector<LEEstimate> table;
    double limit = 0.0;              ///< value at the largest N
    std::vector<double> increments; ///< |L_{N_{i+1}} - L_{N_i}|
};

template <MatrixFunction F>
Extrapolation le_extrapolate(const Cocycle<F>& C, std::span<const std::int64_t> schedule,
                             const QuadratureSpec& quad)
{
    require(!schedule.empty(), ErrorKind::InvalidArgument, "empty schedule");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        require(schedule[i] > schedule[i - 1], ErrorKind::InvalidArgument,
                "schedule must be strictly increasing");
    Extrapolation out;
    for (auto N : schedule)
        out.table.push_back(L_prime_N(C, N, quad));
    for (std::size_t i = 1; i < out.table.size(); ++i)
        out.increments.push_back(std::abs(out.table[i].value - out.table[i - 1].value));
    out.limit = out.table.back().value;
    return out;
}

struct ContinuityRow {
    double distance = 0.0;   ///< strip-norm ||A - B||_rho
    double difference = 0.0; ///< |L_N(A) - L_N(B)|
    double envelope = 0.0;   ///< max difference over rows with distance <= this one
};

struct ContinuityTable {
    std::int64_t N = 0;
    std::vector<ContinuityRow> rows; ///< sorted by distance
    double empirical_constant = 0.0; ///< max difference / distance over distance > 0
};

/// |L_N(A) - L_N(B)| against ||A - B||_rho for each perturbation B.
inline ContinuityTable finite_scale_modulus(const TrigPolyMatrix& A, const Frequency& omega,
                                            std::int64_t N,
                                            std::span<const TrigPolyMatrix> perturbations,
                                            const QuadratureSpec& quad,
                                            std::size_t strip_samples_per_dim = 64)
{
    ContinuityTable out;
    out.N = N;
    const double base = L_N_renormalized(Cocycle(A, omega), N, quad).value;
    for (const auto& B : perturbations) {
        require(B.dim() == A.dim() && B.rho() == A.rho(), ErrorKind::InvalidArgument,
                "perturbations must share dimension and strip radius");
        ContinuityRow row;
        row.distance = strip_norm(A, B, A.rho(), strip_samples_per_dim).value;
        row.difference = std::abs(L_N_renormalized(Cocycle(B, omega), N, quad).value - base);
        out.rows.push_back(row);
    }
    std::stable_sort(out.rows.begin(), out.rows.end(),
                     [](const auto& a, const auto& b) { return a.distance < b.distance; });
    double env = 0.0;
    for (auto& r : out.rows) {
        env = std::max(env, r.difference);
        r.envelope = env;
        if (r.distance > 0.0)
            out.empirical_constant = std::max(out.empirical_constant, r.difference / r.distance);
    }
    return out;
}

} // namespace qpc
