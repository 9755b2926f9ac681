#pragma once

#include <array>
#include <cstdint>

namespace weakval {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
/// Stateless: the output is a pure function of (counter, key).
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter counter, Key key);
};

/// Random stream keyed by (run seed, stream index). Every draw is addressed by
/// (step, slot), so any trajectory can be replayed in isolation and streams
/// never share state across workers.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream);

    /// Two independent uniforms in the open interval (0, 1).
    std::array<double, 2> uniforms(std::uint64_t step, std::uint32_t slot) const;

    /// Standard normal draw (Box-Muller on the uniforms of the same address).
    double normal(std::uint64_t step, std::uint32_t slot) const;

private:
    Philox4x32::Key key_;
    std::uint64_t stream_;
};

}  // namespace weakval
