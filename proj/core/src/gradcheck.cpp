#include "pconv/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace pconv {
namespace {

double eval(const Fragment& f, std::uint64_t seed) {
    Tape tape;
    return f.loss(tape, seed).value().item();
}

}  // namespace

GradCheckResult grad_check(const Fragment& fragment, std::uint64_t seed, double h) {
    for (Parameter* p : fragment.params) p->zero_grad();
    GradientMap analytic;
    {
        Tape tape;
        analytic = backward(tape, fragment.loss(tape, seed));
    }
    for (Parameter* p : fragment.params) p->zero_grad();

    double scale = 0.0;
    for (const auto& [id, g] : analytic)
        for (double v : g.data()) scale = std::max(scale, std::abs(v));

    GradCheckResult result;
    for (Parameter* p : fragment.params) {
        const auto it = analytic.find(p->id);
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double saved = p->value[i];
            p->value[i] = saved + h;
            const double up = eval(fragment, seed);
            p->value[i] = saved - h;
            const double down = eval(fragment, seed);
            p->value[i] = saved;

            const double numeric = (up - down) / (2.0 * h);
            const double a = it == analytic.end() ? 0.0 : it->second[i];
            const double denom = std::max({std::abs(a), std::abs(numeric), 1e-3 * scale, 1e-12});
            const double rel = std::abs(a - numeric) / denom;
            ++result.checked;
            if (rel > result.max_rel_error || result.checked == 1) {
                result.max_rel_error = rel;
                result.worst_param = p->id;
                result.worst_index = i;
                result.analytic = a;
                result.numeric = numeric;
            }
        }
    }
    return result;
}

}  // namespace pconv
