#pragma once

#include "qcurv/special_constants.hpp"

#include <functional>
#include <vector>

namespace qcurv {

enum class DecayRegime { power, log, bounded };

const char* to_string(DecayRegime r);

/// Decay class of the j-th parametrix iterate: |Γ_j(P,Q)| ≲ d^{exponent} (power),
/// |log d| (log) or a constant (bounded), decided by (j+1)p/(p+j) against n/4.
struct KernelIterate {
    int j;
    int n;
    double p;
    DecayRegime regime;
    /// (j+1)(4-n) + jn(1-1/p); filled for every regime, meaningful for `power`.
    double exponent;
};

/// Requires n >= 5, p > n/4, j >= 0.
KernelIterate giraud_classify(int n, double p, int j);

/// Smallest j with a bounded iterate: floor(p(n-4)/(4p-n)) + 1, confirmed by scanning.
int first_bounded_iterate(int n, double p);

/// Kernel exponent l = (j+1)(n-4) - jn(1-1/p) of the Kato-Stummel functional.
double kato_stummel_exponent(int n, double p, int j);

struct KatoStummelQuery {
    std::function<double(double)> density;
    double l;
    double t;
    /// Radially non-increasing |density|: the supremum sits at the centre.
    bool monotone = true;
};

struct KatoStummelResult {
    double phi;
    /// φ(t_k) for t_k = t·2^{-k}, k = 0..decay.size()-1.
    std::vector<double> decay_t;
    std::vector<double> decay;
    bool decreasing_to_zero;
};

/// φ_f(t) = sup_Q ∫_{B_t} |f(S)| d(Q,S)^{-l} dv(S) for a radial density.
/// Throws DomainError for l >= n and ResolutionError when the integral does not
/// settle under refinement (non-integrable density).
KatoStummelResult kato_stummel_phi(const KatoStummelQuery& query, const DimensionSpec& dim);

/// C^{k,β} class of solutions: exponent 3 - frac(p/n), split as k + fractional
/// part, with β ranging over (0, 1 - frac(p/n)).
struct RegularityClass {
    double exponent;
    int k;
    double fraction;
    double beta_lo;
    double beta_hi;
};

RegularityClass regularity_class(int n, double p);

} // namespace qcurv
