#include "nhsta/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <type_traits>

#include "nhsta/errors.hpp"

namespace nhsta {

std::string to_string(ProtocolKind k) {
    switch (k) {
        case ProtocolKind::Uncorrected: return "uncorrected";
        case ProtocolKind::TD: return "td";
        case ProtocolKind::SATD: return "satd";
        case ProtocolKind::RADD: return "radd";
        case ProtocolKind::Custom: return "custom";
    }
    return "custom";
}

ProtocolKind protocol_kind_from_string(const std::string& s) {
    if (s == "uncorrected") return ProtocolKind::Uncorrected;
    if (s == "td") return ProtocolKind::TD;
    if (s == "satd") return ProtocolKind::SATD;
    if (s == "radd") return ProtocolKind::RADD;
    if (s == "custom") return ProtocolKind::Custom;
    throw ConfigError("unknown protocol kind '" + s + "'");
}

namespace {

template <class T>
T interpolate(const std::vector<double>& times, const std::vector<T>& v, double t) {
    if (v.empty()) return T{};
    if (t <= times.front()) return v.front();
    if (t >= times.back()) return v.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - times.begin());
    const double w = (t - times[k - 1]) / (times[k] - times[k - 1]);
    if constexpr (std::is_same_v<T, PauliFields>) {
        return {v[k - 1].x + w * (v[k].x - v[k - 1].x), v[k - 1].y + w * (v[k].y - v[k - 1].y),
                v[k - 1].z + w * (v[k].z - v[k - 1].z)};
    } else {
        return v[k - 1] + w * (v[k] - v[k - 1]);
    }
}

}  // namespace

PauliFields Protocol::fields_at(double t) const {
    if (dense) return dense(t);
    return interpolate(times, fields, t);
}

PauliFields Protocol::correction_at(double t) const {
    if (dense_correction) return dense_correction(t);
    return interpolate(times, correction, t);
}

ComplexMatrix2 Protocol::hamiltonian(double t) const {
    ComplexMatrix2 h = fields_at(t).matrix();
    if (!id_part.empty()) {
        const cplx c = interpolate(times, id_part, t);
        h(0, 0) += c;
        h(1, 1) += c;
    }
    return h;
}

Generator Protocol::generator() const {
    auto self = std::make_shared<const Protocol>(*this);
    return [self](double t) { return self->hamiltonian(t); };
}

void Protocol::validate() const {
    if (times.size() < 2) throw ConfigError("protocol: need at least two samples");
    if (fields.size() != times.size()) throw ConfigError("protocol: field and time grids differ");
    if (!correction.empty() && correction.size() != times.size())
        throw ConfigError("protocol: correction and time grids differ");
    if (!id_part.empty() && id_part.size() != times.size())
        throw ConfigError("protocol: identity part and time grids differ");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1])) throw ConfigError("protocol: times not strictly increasing");
}

double rms_of(const std::vector<double>& times, const std::vector<PauliFields>& f) {
    if (times.size() < 2 || f.size() != times.size()) throw ConfigError("rms: empty or misaligned protocol");
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < times.size(); ++k)
        acc += 0.5 * (times[k + 1] - times[k]) * (f[k].norm_sq() + f[k + 1].norm_sq());
    return std::sqrt(acc / (times.back() - times.front()));
}

double rms(const Protocol& p) { return rms_of(p.times, p.fields); }

double correction_rms(const Protocol& p) {
    if (p.correction.empty()) return 0.0;
    return rms_of(p.times, p.correction);
}

Protocol concatenate(const Protocol& a, const Protocol& b, double tol) {
    a.validate();
    b.validate();
    const PauliFields ea = a.fields.back();
    const PauliFields sb = b.fields.front();
    const double gap = std::sqrt((ea - sb).norm_sq());
    const double scale = std::max(1.0, std::sqrt(ea.norm_sq()));
    if (gap > tol * scale) {
        std::ostringstream os;
        os << "concatenate: protocols do not join (field gap " << gap << ")";
        throw ConfigError(os.str());
    }
    Protocol out;
    out.kind = a.kind == b.kind ? a.kind : ProtocolKind::Custom;
    out.times = a.times;
    out.fields = a.fields;
    out.correction = a.correction;
    out.id_part = a.id_part;
    const double shift = a.times.back() - b.times.front();
    for (std::size_t k = 1; k < b.times.size(); ++k) {
        out.times.push_back(b.times[k] + shift);
        out.fields.push_back(b.fields[k]);
        if (!out.correction.empty()) out.correction.push_back(b.correction.empty() ? PauliFields{} : b.correction[k]);
        if (!out.id_part.empty()) out.id_part.push_back(b.id_part.empty() ? cplx{} : b.id_part[k]);
    }
    auto pa = std::make_shared<const Protocol>(a);
    auto pb = std::make_shared<const Protocol>(b);
    const double t_join = a.times.back();
    out.dense = [pa, pb, t_join, shift](double t) {
        return t <= t_join ? pa->fields_at(t) : pb->fields_at(t - shift);
    };
    out.dense_correction = [pa, pb, t_join, shift](double t) {
        return t <= t_join ? pa->correction_at(t) : pb->correction_at(t - shift);
    };
    return out;
}

double field_jump_ratio(const Protocol& p) {
    if (p.fields.size() < 3) return 0.0;
    std::vector<double> jumps;
    jumps.reserve(p.fields.size() - 1);
    for (std::size_t k = 0; k + 1 < p.fields.size(); ++k)
        jumps.push_back(std::sqrt((p.fields[k + 1] - p.fields[k]).norm_sq()));
    const double mx = *std::max_element(jumps.begin(), jumps.end());
    std::nth_element(jumps.begin(), jumps.begin() + jumps.size() / 2, jumps.end());
    const double med = jumps[jumps.size() / 2];
    return med > 0.0 ? mx / med : (mx > 0.0 ? INFINITY : 0.0);
}

}  // namespace nhsta
