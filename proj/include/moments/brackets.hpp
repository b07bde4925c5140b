#pragma once

// Poisson brackets of the moment algebra: closed forms for pairs of moments,
// the canonical centroid brackets, and the Leibniz extension to polynomials.

#include "moments/symcore.hpp"

namespace moments {

/// K^n_{abcd} = sum_m (-1)^m m! (n-m)! C(a,m) C(b,n-m) C(c,n-m) C(d,m).
Rational kCoefficient(int a, int b, int c, int d, int n);

MomentPoly quantumBracket(const MomentKey& x, const MomentKey& y);
MomentPoly classicalBracket(const MomentKey& x, const MomentKey& y);
/// Dispatches on kind; mixing kinds throws KindMismatchError.
MomentPoly bracket(const MomentKey& x, const MomentKey& y);

/// Bracket between two generators: {q,p} = 1, moments commute with q and p,
/// moment pairs go through bracket().
MomentPoly centroidBracket(const Variable& x, const Variable& y);

/// {f, g} extended by bilinearity and the Leibniz rule over all generators.
MomentPoly poissonBracket(const MomentPoly& f, const MomentPoly& g);

/// Quantum bracket recomputed from operator commutators alone:
/// (-i/hbar)<[W_ab, W_cd]> plus the terms from the dependence of both moments
/// on the centroid, each of which is again a single-letter commutator.
MomentPoly commutatorBracket(const MomentKey& x, const MomentKey& y);

}  // namespace moments
