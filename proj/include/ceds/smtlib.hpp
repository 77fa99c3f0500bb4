#ifndef CEDS_SMTLIB_HPP
#define CEDS_SMTLIB_HPP

#include "ceds/bv.hpp"

#include <string>

namespace ceds {

// Stable wire names: s<seg>_p<pos>_g<gen> prefixed with L_ or R_ for the query
// side. Cache keys and golden files depend on this being bit-exact.
std::string smtlib_var_name(const VarId& v);

std::string smtlib_sort(Sort s);

// S-expression for a single term.
std::string smtlib_term(const Term& t);

// Complete script over logic BV: declarations for every free variable of the
// assertion (sorted by VarId), one assertion, (check-sat). Deterministic for a
// given term.
std::string smtlib_script(const Term& assertion);

std::string smtlib_script(const Conjunction& c);

} // namespace ceds

#endif
