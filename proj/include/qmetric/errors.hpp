#pragma once

#include <stdexcept>
#include <string>

namespace qmetric {

/// Input value is syntactically valid but numerically unusable (NaN/inf).
class invalid_value : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Iterative scheme exhausted its refinement budget. Carries diagnostics in what().
class convergence_failure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Root bracket does not contain a sign change.
class bracket_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Two sampled functions do not live on the same grid/measure.
class incompatible_grids : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A quadrature self-check failed beyond tolerance.
class accuracy_failure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Sphere angle requested for a state on the degenerate shell (m == 0).
class undefined_angle : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Law-of-cosines ratio falls outside [-1, 1] by more than quadrature noise.
class inconsistent_distance : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Energy scan hit the edge of the allowed m window without passing a minimum.
class window_too_small : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace qmetric
