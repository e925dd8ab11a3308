#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nhsta/matrix2.hpp"

namespace nhsta {

enum class ProtocolKind { Uncorrected, TD, SATD, RADD, Custom };

std::string to_string(ProtocolKind k);
ProtocolKind protocol_kind_from_string(const std::string& s);

using FieldFunction = std::function<PauliFields(double)>;
using Generator = std::function<ComplexMatrix2(double)>;

// H(t) = id_part(t) 1 + fx sx + fy sy + fz sz, sampled on `times`.
// `correction` is the STA part W = H - H_sym (zero for uncorrected runs).
// `dense` / `dense_correction` evaluate the same fields at any t in
// [times.front(), times.back()]; when absent, samples are interpolated.
struct Protocol {
    ProtocolKind kind = ProtocolKind::Custom;
    std::vector<double> times;
    std::vector<PauliFields> fields;
    std::vector<PauliFields> correction;
    std::vector<cplx> id_part;
    FieldFunction dense;
    FieldFunction dense_correction;

    std::size_t size() const { return times.size(); }
    double duration() const { return times.empty() ? 0.0 : times.back() - times.front(); }
    PauliFields fields_at(double t) const;
    PauliFields correction_at(double t) const;
    ComplexMatrix2 hamiltonian(double t) const;
    Generator generator() const;
    void validate() const;
};

// Root-mean-square amplitude of the full traceless fields, trapezoidal rule.
double rms(const Protocol& p);
// Same measure applied to the correction fields only.
double correction_rms(const Protocol& p);
double rms_of(const std::vector<double>& times, const std::vector<PauliFields>& f);

// b runs after a; the junction sample appears once. Throws on field mismatch.
Protocol concatenate(const Protocol& a, const Protocol& b, double tol = 1e-9);

// Largest sample-to-sample field jump divided by the median jump.
double field_jump_ratio(const Protocol& p);

}  // namespace nhsta
