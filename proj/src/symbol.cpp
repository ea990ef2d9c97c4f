#include "hlab/error.hpp"
#include "hlab/funcalc.hpp"

#include <cmath>

namespace hlab {
namespace {

Complex term_value(const SymbolTerm& term, Complex z) {
    Complex value = term.coefficient;
    if (term.power != 0.0) value *= std::pow(z, term.power);
    if (term.rate != 0.0) value *= std::exp(-term.rate * z);
    if (term.order != 0.0) value *= std::pow(term.shift + z, -term.order);
    return value;
}

std::vector<Complex> cauchy_product(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    std::vector<Complex> out(a.size(), Complex(0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; i + j < a.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

}  // namespace

Symbol Symbol::exponential(double t) { return Symbol({SymbolTerm{1.0, 0.0, t, 1.0, 0.0}}); }

Symbol Symbol::power_exponential(int k, double s) {
    if (k < 0) throw InvalidArgument("power must be non-negative");
    return Symbol({SymbolTerm{std::pow(s, k), static_cast<double>(k), s, 1.0, 0.0}});
}

Symbol Symbol::resolvent(Complex lambda) { return Symbol({SymbolTerm{1.0, 0.0, 0.0, lambda, 1.0}}); }

Symbol Symbol::power(double a) { return Symbol({SymbolTerm{1.0, a, 0.0, 1.0, 0.0}}); }

Complex Symbol::operator()(Complex z) const {
    if (z == Complex(0.0)) return kernel_value();
    Complex sum = 0.0;
    for (const auto& term : terms_) sum += term_value(term, z);
    return sum;
}

Complex Symbol::kernel_value() const {
    Complex sum = 0.0;
    for (const auto& term : terms_) {
        if (term.power != 0.0) continue;
        Complex value = term.coefficient;
        if (term.order != 0.0) value *= std::pow(term.shift, -term.order);
        sum += value;
    }
    return sum;
}

std::vector<Complex> Symbol::taylor(Complex sigma, int count) const {
    if (sigma == Complex(0.0)) throw InvalidArgument("Taylor expansion point must be nonzero");
    const auto K = static_cast<std::size_t>(count);
    std::vector<Complex> total(K, Complex(0.0));
    for (const auto& term : terms_) {
        std::vector<Complex> p(K), e(K), r(K);
        // z^a: binom(a, j) sigma^{a - j}
        Complex binom = 1.0;
        const Complex base = term.power != 0.0 ? std::pow(sigma, term.power) : Complex(1.0);
        for (std::size_t j = 0; j < K; ++j) {
            if (j > 0) binom *= (term.power - static_cast<double>(j - 1)) / static_cast<double>(j) / sigma;
            p[j] = base * binom;
        }
        // e^{-b z}: e^{-b sigma} (-b)^j / j!
        Complex ej = std::exp(-term.rate * sigma);
        for (std::size_t j = 0; j < K; ++j) {
            if (j > 0) ej *= -term.rate / static_cast<double>(j);
            e[j] = ej;
        }
        // (c + z)^{-r}: binom(-r, j) (c + sigma)^{-r - j}
        const Complex shifted = term.shift + sigma;
        Complex rj = term.order != 0.0 ? std::pow(shifted, -term.order) : Complex(1.0);
        for (std::size_t j = 0; j < K; ++j) {
            if (j > 0) rj *= (-term.order - static_cast<double>(j - 1)) / static_cast<double>(j) / shifted;
            r[j] = rj;
        }
        const auto product = cauchy_product(cauchy_product(p, e), r);
        for (std::size_t j = 0; j < K; ++j) total[j] += term.coefficient * product[j];
    }
    return total;
}

Symbol Symbol::dilated(double s) const {
    if (!(s > 0.0)) throw InvalidArgument("dilation factor must be positive");
    std::vector<SymbolTerm> out;
    for (auto term : terms_) {
        term.coefficient *= std::pow(s, term.power - term.order);
        term.rate *= s;
        term.shift /= s;
        out.push_back(term);
    }
    return Symbol(std::move(out));
}

Symbol Symbol::operator+(const Symbol& other) const {
    std::vector<SymbolTerm> out = terms_;
    out.insert(out.end(), other.terms_.begin(), other.terms_.end());
    return Symbol(std::move(out));
}

Symbol Symbol::operator*(Complex scale) const {
    std::vector<SymbolTerm> out = terms_;
    for (auto& term : out) term.coefficient *= scale;
    return Symbol(std::move(out));
}

}  // namespace hlab
