#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pspace {

/// Unit conversions (CODATA-derived).
namespace units {
inline constexpr double intensity_au_wcm2 = 3.50944506e16;  ///< I for E_m = 1 a.u.
inline constexpr double nm_to_omega = 45.5633526;           ///< omega = this / lambda(nm)
inline constexpr double hartree_ev = 27.211386245988;
inline constexpr double fs_to_au = 41.341373335182114;      ///< 1 fs in atomic time units
} // namespace units

/// Which quantity carries the sin^2 envelope.
enum class EnvelopeTarget { electric_field, vector_potential };

/// Resolved pulse parameters. E_m is the peak field amplitude (for the
/// vector-potential envelope the peak of A is E_m / omega), omega the
/// carrier frequency, T the total duration, cep the carrier-envelope
/// phase. The field lives on t in [0, T] and vanishes outside.
struct PulseConfig {
    double peak_field = 0.0;  ///< E_m, a.u.
    double omega = 0.0;       ///< carrier frequency, a.u.
    double duration = 0.0;    ///< T, a.u.
    double cep = 0.0;         ///< phi, radians
    EnvelopeTarget envelope = EnvelopeTarget::electric_field;

    void validate() const {
        if (!(peak_field >= 0.0)) throw std::invalid_argument("pulse: peak field must be >= 0");
        if (!(omega > 0.0)) throw std::invalid_argument("pulse: omega must be positive");
        if (!(duration > 0.0)) throw std::invalid_argument("pulse: duration must be positive");
    }
};

/// (E_m, omega) from lab units: E_m = sqrt(I / 3.50944506e16),
/// omega = 45.5633526 / lambda_nm.
struct FieldFrequency {
    double peak_field;
    double omega;
};

inline FieldFrequency convert_units(double intensity_wcm2, double wavelength_nm) {
    if (intensity_wcm2 <= 0.0 || wavelength_nm <= 0.0)
        throw std::invalid_argument("convert_units: intensity and wavelength must be positive");
    return {std::sqrt(intensity_wcm2 / units::intensity_au_wcm2),
            units::nm_to_omega / wavelength_nm};
}

inline double duration_from_cycles(double cycles, double omega) {
    return cycles * 2.0 * std::numbers::pi / omega;
}

/// Ratio FWHM / T of the sin^4 intensity envelope of a sin^2 pulse:
/// 1 - (2/pi) asin(2^{-1/4}) ~ 0.36398. "FWHM 10 fs" style inputs are read
/// as the intensity-envelope full width at half maximum.
inline double sin2_intensity_fwhm_ratio() {
    return 1.0 - (2.0 / std::numbers::pi) * std::asin(std::pow(2.0, -0.25));
}

inline double duration_from_fwhm_fs(double fwhm_fs) {
    return fwhm_fs * units::fs_to_au / sin2_intensity_fwhm_ratio();
}

namespace detail {
/// int_0^t cos(a t' + phi) dt', stable for a -> 0.
inline double cos_antiderivative(double a, double phi, double t) {
    if (std::abs(a * t) < 1e-12) return t * std::cos(phi + 0.5 * a * t);
    return (std::sin(a * t + phi) - std::sin(phi)) / a;
}
} // namespace detail

/// E(t). Envelope-on-E: E_m sin^2(pi t/T) cos(omega t + phi) inside [0, T],
/// zero outside. Envelope-on-A: -dA/dt evaluated analytically.
inline double electric_field(const PulseConfig& cfg, double t) {
    if (t <= 0.0 || t >= cfg.duration) return 0.0;
    const double env = std::sin(std::numbers::pi * t / cfg.duration);
    const double carrier = cfg.omega * t + cfg.cep;
    if (cfg.envelope == EnvelopeTarget::electric_field)
        return cfg.peak_field * env * env * std::cos(carrier);
    // A(t) = A_m sin^2(pi t/T) cos(omega t + phi), A_m = E_m / omega
    const double a_m = cfg.peak_field / cfg.omega;
    const double dod = std::numbers::pi / cfg.duration;
    return -a_m * (dod * std::sin(2.0 * dod * t) * std::cos(carrier) -
                   env * env * cfg.omega * std::sin(carrier));
}

/// A(t) = -int_0^t E. Envelope-on-E uses the closed-form antiderivative of
/// the three cosine terms of the sin^2 expansion; envelope-on-A is the
/// direct expression. Constant for t > T (zero in the envelope-on-A mode).
inline double vector_potential(const PulseConfig& cfg, double t) {
    if (t <= 0.0) return 0.0;
    const double tc = std::min(t, cfg.duration);
    if (cfg.envelope == EnvelopeTarget::vector_potential) {
        if (t >= cfg.duration) return 0.0;
        const double env = std::sin(std::numbers::pi * t / cfg.duration);
        return cfg.peak_field / cfg.omega * env * env * std::cos(cfg.omega * t + cfg.cep);
    }
    const double big_omega = 2.0 * std::numbers::pi / cfg.duration;
    const double s0 = detail::cos_antiderivative(cfg.omega, cfg.cep, tc);
    const double sp = detail::cos_antiderivative(cfg.omega + big_omega, cfg.cep, tc);
    const double sm = detail::cos_antiderivative(cfg.omega - big_omega, cfg.cep, tc);
    return -cfg.peak_field * (0.5 * s0 - 0.25 * sp - 0.25 * sm);
}

} // namespace pspace
