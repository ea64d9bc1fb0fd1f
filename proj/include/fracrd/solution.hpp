#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fracrd/kernels.hpp"
#include "fracrd/riesz_feller.hpp"
#include "fracrd/special_functions.hpp"
#include "fracrd/transforms.hpp"

namespace fracrd {

/// Time orders, coupling and the space operators of
///   D^alpha N + a D^beta N = sum_j lambda_j D^{gamma_j}_{theta_j} N + U.
struct OrderParams {
    double alpha = 1.0;
    double beta = 1.0;
    double a = 0.0;
    std::vector<SpaceOperator> operators;

    /// 0 < beta <= alpha <= 2, a >= 0, at least one valid operator.
    void validate() const;
    /// b*(k) = sum_j lambda_j psi_j(k).
    cplx b_star(double k) const;
};

/// Spatial profile used for initial data and for the space factor of sources.
struct Profile {
    enum class Kind { zero, delta, gaussian, table };
    Kind kind = Kind::delta;
    double amplitude = 1.0;
    double center = 0.0;
    double width = 1.0;    ///< Gaussian: amplitude * exp(-((x-center)/width)^2)
    UniformSamples table;  ///< tabulated samples, zero outside the grid

    /// Fourier transform int p(x) exp(+ikx) dx (closed form, trapezoid for tables).
    cplx transform(double k) const;
    /// Pointwise value; throws InvalidParameter for the delta profile.
    double value(double x) const;
    void validate(const std::string& field) const;

    static Profile zero_profile() { return {Kind::zero, 0.0, 0.0, 1.0, {}}; }
    static Profile delta(double amplitude = 1.0, double center = 0.0) { return {Kind::delta, amplitude, center, 1.0, {}}; }
    static Profile gaussian(double amplitude, double center, double width) {
        return {Kind::gaussian, amplitude, center, width, {}};
    }
};

/// Source term U(x,t).
struct SourceSpec {
    enum class Kind { zero, separable, table };
    enum class TimeKind { constant, exponential };
    Kind kind = Kind::zero;
    Profile space;                            ///< u1 for separable sources
    TimeKind time_kind = TimeKind::constant;  ///< u2(t) = value or value * exp(rate t)
    double time_value = 1.0;
    double time_rate = 0.0;
    // table: rows U(x, t0 + i dt) on a common uniform x grid
    double table_t0 = 0.0;
    double table_dt = 1.0;
    std::vector<UniformSamples> table_rows;

    void validate() const;
};

/// U*(k,t); throws OutOfRange when a table does not cover t.
cplx source_transform(const SourceSpec& U, double k, double t);

enum class KernelBackend { series, talbot };

struct SpectralSettings {
    double K = 0.0;   ///< cutoff; 0 selects max_j 40 (lambda_j t_min)^(-1/gamma_j)
    double dk = 0.0;  ///< spacing; 0 selects pi / (4 R), R >= max|x| plus the solution spread
    bool exploit_symmetry = true;  ///< reuse conj(N*(k)) at -k for real data
    bool refine = false;           ///< halve dk and double K until outputs settle
};

struct Tolerances {
    double kernel = 1e-9;       ///< kernel series relative tolerance
    double convolution = 1e-8;  ///< Gauss-Jacobi doubling stability
    double cutoff_decay = 1e-8; ///< |N*(+-K)| / max|N*| bound
    double refine = 1e-6;       ///< refinement threshold and default aliasing target, relative to max|N|
    int max_cutoff_doublings = 6;
};

struct Scenario {
    OrderParams orders;
    Profile f = Profile::delta();
    std::optional<Profile> g;
    SourceSpec U;
    std::vector<double> t_points;
    std::vector<double> x_grid;
    SpectralSettings spectral;
    Tolerances tol;
    KernelBackend backend = KernelBackend::series;

    /// Field-addressed validation (messages name e.g. "initial.g").
    void validate() const;
    /// True when f, g and U are real-valued functions.
    bool real_data() const;
};

struct SpectralValue {
    cplx value{};
    bool talbot_fallback = false;
    int kernel_terms = 0;
    int asymptotic_calls = 0;
    int convolution_nodes = 0;
    bool convolution_settled = true;
    double kernel_error = 0.0;
};

/// N*(k,t) = f* K_f + g* K_g + int_0^t U*(k,t-xi) K_U(xi) dxi.
SpectralValue spectral_solution(const Scenario& sc, double k, double t);

struct FieldDiagnostics {
    double K = 0.0;
    double dk = 0.0;
    std::size_t k_samples = 0;
    std::size_t kernel_evaluations = 0;
    std::size_t talbot_fallbacks = 0;
    std::size_t unsettled_convolutions = 0;
    std::size_t asymptotic_calls = 0;
    int max_kernel_terms = 0;
    double max_kernel_error = 0.0;
    int cutoff_doublings = 0;
    int refinement_rounds = 0;
    double refinement_change = 0.0;
    std::vector<std::string> fallback_samples;  ///< first few (k,t) that used Talbot
    std::vector<std::string> warnings;
};

struct Field {
    std::vector<double> t_points;
    std::vector<double> x_grid;
    std::vector<std::vector<double>> values;        ///< [t][x]
    std::vector<std::vector<double>> imag_residue;  ///< [t][x]
    double max_imag_residue = 0.0;
    double max_abs = 0.0;
    FieldDiagnostics diagnostics;
};

/// Spectral assembly on a symmetric k grid followed by Fourier inversion per t.
Field solve_field(const Scenario& sc);

/// Two-root evaluation for a single gamma = 2, theta = 0 operator and orders (2 nu, nu), 0 < nu <= 1.
/// Nodes where a^2 = 4 lambda k^2 are replaced by the mean of two neighbours at k +- 1e-5 max(|k|, 1e-3).
Field telegraph_solution(const Scenario& sc);
/// The spectral value used by telegraph_solution at one (k, t).
SpectralValue telegraph_spectral(const Scenario& sc, double k, double t);

}  // namespace fracrd
