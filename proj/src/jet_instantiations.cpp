// Anchor translation unit: compiles the jet arithmetic once for both scalar
// modes so every consumer links against a single set of symbols.

#include "tll/jet.hpp"

namespace tll {

template JetT<Complex> jet_add(const JetT<Complex>&, const JetT<Complex>&);
template JetT<Complex> jet_sub(const JetT<Complex>&, const JetT<Complex>&);
template JetT<Complex> jet_mul(const JetT<Complex>&, const JetT<Complex>&, std::optional<ExtCap>);
template JetT<Complex> jet_pow(const JetT<Complex>&, int, std::optional<ExtCap>);
template JetT<Complex> jet_compose(const JetT<Complex>&, const std::vector<JetT<Complex>>&,
                                   std::optional<ExtCap>);
template JetT<Complex> jet_diff(const JetT<Complex>&, int);
template JetT<Complex> jet_invert(const JetT<Complex>&);
template JetT<Complex> jet_sqrt(const JetT<Complex>&);
template JetT<Complex> jet_log(const JetT<Complex>&);
template JetT<Complex> jet_exp(const JetT<Complex>&);
template JetT<Complex> jet_shift_var(const JetT<Complex>&, int, const JetT<Complex>&,
                                     std::optional<ExtCap>);

template JetT<ComplexRational> jet_add(const JetT<ComplexRational>&, const JetT<ComplexRational>&);
template JetT<ComplexRational> jet_sub(const JetT<ComplexRational>&, const JetT<ComplexRational>&);
template JetT<ComplexRational> jet_mul(const JetT<ComplexRational>&, const JetT<ComplexRational>&,
                                       std::optional<ExtCap>);
template JetT<ComplexRational> jet_pow(const JetT<ComplexRational>&, int, std::optional<ExtCap>);
template JetT<ComplexRational> jet_compose(const JetT<ComplexRational>&,
                                           const std::vector<JetT<ComplexRational>>&,
                                           std::optional<ExtCap>);
template JetT<ComplexRational> jet_diff(const JetT<ComplexRational>&, int);
template JetT<ComplexRational> jet_invert(const JetT<ComplexRational>&);

}  // namespace tll
