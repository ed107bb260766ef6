#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qpsi/qseries.hpp"

namespace qpsi {

// Closed catalog of checkable identities.
enum class IdentityId {
  SIXPSI6_SUM,      // Bailey's very-well-poised 6psi6 summation
  EIGHTPHI7_EXT,    // three-term nonterminating extension of Jackson's 8phi7 sum
  SEMI_6PSI6,       // semi-finite form of the 6psi6 summation
  EIGHTPHI7_TRANS,  // two-term nonterminating very-well-poised 8phi7 transformation
  SEMI_8PHI7,       // semi-finite form of the 8phi7 transformation
  SIXPSI6_TRANS,    // 6psi6 -> 6psi6 transformation with an extra parameter
  TENPHI9_4TERM,    // Bailey's four-term 10phi9 transformation
  SEMI_10PHI9,      // semi-finite form of the four-term transformation
  EIGHTPSI8_TRANS,  // 8psi8 in terms of an 8psi8 and two 8phi7 series
  SIXPHI5_SUM,      // very-well-poised 6phi5 summation (sanity)
  ONEPSI1_SUM,      // Ramanujan's 1psi1 summation (sanity)
};

std::string_view to_string(IdentityId id);
std::optional<IdentityId> identity_from_string(std::string_view s);

// Parameter set for one identity check. Only the letters listed in the
// identity's info are meaningful; `lambda` is always derived, never free.
// For ONEPSI1_SUM the letter c plays the series argument z.
struct ParamSet {
  Complex a, b, c, d, e, f, g, h, lambda;
  long n = 0;
  QBase base;

  const Complex& letter(char name) const;
  Complex& letter(char name);
};

struct IdentityInfo {
  IdentityId id;
  std::string_view name;
  std::string_view summary;
  std::string_view free_letters;     // letters the sampler draws, e.g. "acdef"
  std::string_view derived_letters;  // letters filled by solve_constraints
  bool semi_finite = false;          // identity carries the depth parameter n
  std::string_view constraint;       // human-readable constraint description
};

const std::vector<IdentityInfo>& identity_registry();
const IdentityInfo& identity_info(IdentityId id);

// ---------------------------------------------------------------------------
// Term IR: each side of an identity is a sum of terms, each a Pochhammer
// product coefficient times an optional series. Keeping this explicit lets
// the pole scan walk every factor the evaluation will ever divide by.
// ---------------------------------------------------------------------------

struct PochFactor {
  Complex arg;
  bool infinite = true;
  long k = 0;  // used when !infinite
};

struct ProductExpr {
  BoundedValue scalar;
  std::vector<PochFactor> numer, denom;
};

struct TermExpr {
  std::string label;
  ProductExpr coeff;
  std::optional<SeriesSpec> series;
  // NoConvergence in this component marks the sample skipped instead of failed
  // (used for series whose convergence region the source identity leaves open).
  bool skippable = false;
};

struct IdentityInstance {
  std::vector<TermExpr> lhs, rhs;
};

BoundedValue eval_product(const ProductExpr& pe, const QBase& base, const EvalContext& ctx);

struct ComponentStats {
  std::string label;
  bool is_series = false;
  long terms_up = 0, terms_down = 0;
  Real tail_bound;
  Real abs_err;
  bool converged = true;
};

// Fully expanded term list for an identity at a concrete parameter set.
IdentityInstance build_instance(IdentityId id, const ParamSet& ps, const EvalContext& ctx);

// ---------------------------------------------------------------------------
// Constraint solving and checking
// ---------------------------------------------------------------------------

// Completes a partial parameter set (derives the constrained letter and
// lambda), then validates convergence moduli, degeneracy guards and pole
// distances over the whole planned evaluation. Throws ConstraintViolation.
ParamSet solve_constraints(IdentityId id, const ParamSet& partial, const EvalContext& ctx);

struct IdentityReport {
  IdentityId identity = IdentityId::SIXPSI6_SUM;
  ParamSet params;
  BoundedValue lhs, rhs;
  Real residual;
  bool pass = false;
  bool skipped = false;
  std::string skip_reason;
  std::vector<ComponentStats> diagnostics;
};

// Evaluates both sides exactly as displayed (multi-term sides are summed) and
// reports the symmetric relative residual. pass requires the residual to meet
// `tolerance` AND to be explained by the certified error bounds.
IdentityReport check_identity(IdentityId id, const ParamSet& ps, const EvalContext& ctx);
IdentityReport check_identity(IdentityId id, const ParamSet& ps, const EvalContext& ctx,
                              const Real& tolerance);

// Coefficients of the semi-finite four-term transformation.
BoundedValue coeff_alpha(const ParamSet& ps, const EvalContext& ctx);
BoundedValue coeff_beta(const ParamSet& ps, const EvalContext& ctx);
BoundedValue coeff_gamma(const ParamSet& ps, const EvalContext& ctx);

}  // namespace qpsi
