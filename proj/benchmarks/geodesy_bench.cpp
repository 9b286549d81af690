#include <benchmark/benchmark.h>

#include <random>

#include "ave/geodesy.hpp"

namespace {

std::vector<ave::GeoCoord> random_points(std::size_t n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> lat(-79.0, 83.0), lon(-179.9, 179.9);
  std::vector<ave::GeoCoord> out(n);
  for (auto& p : out) p = {lat(rng), lon(rng)};
  return out;
}

void BM_LatLonToUtm(benchmark::State& state) {
  const auto pts = random_points(4096);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ave::latlon_to_utm(pts[i++ & 4095]));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_LatLonToUtm);

void BM_UtmToLatLon(benchmark::State& state) {
  std::vector<ave::UtmCoord> utm;
  for (const auto& p : random_points(4096)) utm.push_back(ave::latlon_to_utm(p));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ave::utm_to_latlon(utm[i++ & 4095]));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_UtmToLatLon);

}  // namespace
