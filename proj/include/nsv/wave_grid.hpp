#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsv {

/// Discrete Fourier lattice for the periodic box [0, L)^4.
///
/// Sites are enumerated in row-major order over the four dimensions, the
/// same layout FFTW uses for a rank-4 complex transform.  Integer mode
/// numbers follow the signed convention m_j in {-n/2, ..., n/2 - 1} and the
/// physical wavevector of a site is k = (2*pi/L) * m.
///
/// Dealiasing keeps the largest symmetric cube of modes whose quadratic
/// products cannot fold back into the cube: |m_j| <= m_max with
/// 3*m_max <= n - 1.  The strict form matters: it also makes the grid
/// quadrature of cubic products of retained modes exact, which several
/// routines here rely on.  For n = 8 and n = 16 it coincides with the
/// usual n/3 rule (m_max = 2 and 5).
class WaveGrid {
public:
    explicit WaveGrid(int n_per_dim, double box_length = 2.0 * std::numbers::pi)
        : n_(n_per_dim), box_length_(box_length) {
        if (n_ < 8 || n_ % 2 != 0)
            throw std::invalid_argument("WaveGrid: n_per_dim must be even and >= 8, got " +
                                        std::to_string(n_));
        if (!(box_length_ > 0.0))
            throw std::invalid_argument("WaveGrid: box_length must be positive");

        k_scale_ = 2.0 * std::numbers::pi / box_length_;
        volume_ = box_length_ * box_length_ * box_length_ * box_length_;
        size_ = static_cast<std::size_t>(n_) * n_ * n_ * n_;
        m_max_ = (n_ - 1) / 3;

        modes_.resize(size_);
        mode_sq_.resize(size_);
        mask_.resize(size_);
        retained_ = 0;

        std::size_t site = 0;
        for (int i0 = 0; i0 < n_; ++i0)
            for (int i1 = 0; i1 < n_; ++i1)
                for (int i2 = 0; i2 < n_; ++i2)
                    for (int i3 = 0; i3 < n_; ++i3, ++site) {
                        const std::array<int, 4> m = {signed_mode(i0), signed_mode(i1),
                                                      signed_mode(i2), signed_mode(i3)};
                        modes_[site] = m;
                        mode_sq_[site] = m[0] * m[0] + m[1] * m[1] + m[2] * m[2] + m[3] * m[3];
                        const bool keep = std::abs(m[0]) <= m_max_ && std::abs(m[1]) <= m_max_ &&
                                          std::abs(m[2]) <= m_max_ && std::abs(m[3]) <= m_max_;
                        mask_[site] = keep ? 1 : 0;
                        if (keep) ++retained_;
                    }
    }

    int n() const noexcept { return n_; }
    double box_length() const noexcept { return box_length_; }
    double volume() const noexcept { return volume_; }
    double k_scale() const noexcept { return k_scale_; }
    std::size_t size() const noexcept { return size_; }
    int max_retained_mode() const noexcept { return m_max_; }
    std::size_t retained_count() const noexcept { return retained_; }

    const std::array<int, 4>& modes(std::size_t site) const { return modes_[site]; }
    int mode_sq(std::size_t site) const { return mode_sq_[site]; }
    double k_sq(std::size_t site) const { return k_scale_ * k_scale_ * mode_sq_[site]; }
    bool keep(std::size_t site) const { return mask_[site] != 0; }
    bool is_zero_mode(std::size_t site) const { return site == 0; }

    /// Site index of an integer mode vector (entries wrapped mod n).
    std::size_t site_of(const std::array<int, 4>& m) const {
        std::size_t site = 0;
        for (int j = 0; j < 4; ++j) {
            const int idx = ((m[j] % n_) + n_) % n_;
            site = site * static_cast<std::size_t>(n_) + static_cast<std::size_t>(idx);
        }
        return site;
    }

    /// Site holding mode -m; pairs with `site` under Hermitian symmetry.
    std::size_t conjugate_site(std::size_t site) const {
        std::size_t out = 0;
        std::size_t rem = site;
        // decompose row-major index and negate each digit mod n
        std::array<int, 4> idx;
        for (int j = 3; j >= 0; --j) {
            idx[j] = static_cast<int>(rem % static_cast<std::size_t>(n_));
            rem /= static_cast<std::size_t>(n_);
        }
        for (int j = 0; j < 4; ++j) {
            const int neg = (n_ - idx[j]) % n_;
            out = out * static_cast<std::size_t>(n_) + static_cast<std::size_t>(neg);
        }
        return out;
    }

    /// Canonical representative of the {m, -m} pair: first nonzero entry
    /// positive.  False for the zero mode.
    bool is_canonical(std::size_t site) const {
        const auto& m = modes_[site];
        for (int j = 0; j < 4; ++j) {
            if (m[j] != 0) return m[j] > 0;
        }
        return false;
    }

    bool same_layout(const WaveGrid& other) const noexcept {
        return n_ == other.n_ && box_length_ == other.box_length_;
    }

private:
    int signed_mode(int idx) const { return idx < n_ / 2 ? idx : idx - n_; }

    int n_;
    double box_length_;
    double k_scale_;
    double volume_;
    std::size_t size_;
    int m_max_;
    std::size_t retained_;
    std::vector<std::array<int, 4>> modes_;
    std::vector<int> mode_sq_;
    std::vector<char> mask_;
};

using GridPtr = std::shared_ptr<const WaveGrid>;

inline GridPtr make_grid(int n_per_dim, double box_length = 2.0 * std::numbers::pi) {
    return std::make_shared<const WaveGrid>(n_per_dim, box_length);
}

}  // namespace nsv
