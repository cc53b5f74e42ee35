#ifndef GELAB_RNG_HPP
#define GELAB_RNG_HPP

#include <cstdint>
#include <string>

namespace gelab {

/// splitmix64 step; the workhorse behind all derived seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    return splitmix64(seed ^ splitmix64(salt));
}

inline std::uint64_t hash_string(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Per-cell seed: isolates reruns of single (dataset, model, run) cells.
inline std::uint64_t derive_seed(std::uint64_t master, const std::string& dataset,
                                 const std::string& model, int run) {
    std::uint64_t h = splitmix64(master);
    h = mix_seed(h, hash_string(dataset));
    h = mix_seed(h, hash_string(model));
    h = mix_seed(h, static_cast<std::uint64_t>(run));
    return h;
}

}  // namespace gelab

#endif
