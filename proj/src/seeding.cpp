#include <tandem/seeding.hpp>

namespace tandem {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> indices) {
  std::uint64_t h = splitmix64(master ^ 0x9e3779b97f4a7c15ULL);
  for (std::uint64_t idx : indices)
    h = splitmix64(h + splitmix64(idx + 1));
  return h;
}

} // namespace tandem
