#include "subtilt/rng.hpp"

#include "kernels_impl.hpp"

namespace subtilt {

RandomStream RandomStream::derive(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    using kernels::detail::golden;
    using kernels::detail::mix64;
    std::uint64_t a = mix64(seed + golden);
    std::uint64_t b = mix64(a ^ tag);
    std::uint64_t key = mix64(mix64(b + index * golden));
    return RandomStream(key);
}

double RandomStream::next() { return kernels::detail::uniform_at(key_, counter_++); }

void RandomStream::fill(double* out, std::size_t n) {
    kernels::fill_uniform(key_, counter_, out, n);
    counter_ += n;
}

}  // namespace subtilt
