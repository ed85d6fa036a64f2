#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

#include "numeric.hpp"

namespace qmarg {

/*!
 * Philox4x32-10 counter-based generator. The key is the user seed, the
 * high half of the counter selects an independent stream, and the low half
 * counts blocks within the stream. Satisfies UniformRandomBitGenerator.
 */
class Philox {
  public:
    using result_type = std::uint64_t;

    Philox(std::uint64_t seed, std::uint64_t stream) : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (avail_ == 0) refill();
        --avail_;
        auto const* w = &out_[2 * avail_];
        return (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
    }

    std::uint64_t stream() const { return stream_; }

  private:
    void refill() {
        std::array<std::uint32_t, 4> c{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                       static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        std::array<std::uint32_t, 2> k = key_;
        for (int round = 0; round < 10; ++round) {
            std::uint64_t p0 = static_cast<std::uint64_t>(0xD2511F53u) * c[0];
            std::uint64_t p1 = static_cast<std::uint64_t>(0xCD9E8D57u) * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
            k[0] += 0x9E3779B9u;
            k[1] += 0xBB67AE85u;
        }
        out_ = c;
        avail_ = 2;
        ++block_;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> out_{};
    int avail_ = 0;
};

//! Haar-distributed unitary: QR of a complex Ginibre matrix with the
//! phases of diag(R) moved into Q.
template<class Rng>
CMat haar_unitary(int N, Rng& rng) {
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    CMat z(N, N);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            double re = nd(rng);
            double im = nd(rng);
            z(i, j) = cplx(re, im);
        }
    Eigen::HouseholderQR<CMat> qr(z);
    CMat q = qr.householderQ() * CMat::Identity(N, N);
    for (int j = 0; j < N; ++j) {
        cplx d = qr.matrixQR()(j, j);
        double a = std::abs(d);
        q.col(j) *= (a > 0 ? d / a : cplx(1, 0));
    }
    return q;
}

}  // namespace qmarg
