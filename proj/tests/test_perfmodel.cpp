#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sell/perfmodel.hpp"

using namespace sell;

TEST_CASE("cost model closed forms") {
  const auto c128 = cost_model(128);
  CHECK(c128.arithmetic_intensity == 4.875);
  CHECK(c128.flops == 4 * 128 + 5 * 128 * 7);
  CHECK(cost_model(16384).arithmetic_intensity == 9.25);
  const auto c1024 = cost_model(1024, 128);
  CHECK(c1024.flops == 55296.0);
  CHECK(c1024.bytes_uncached == 24 * 1024);
  CHECK(c1024.bytes_cached == 8 * 1024);
  CHECK(c1024.batch == 128);
  CHECK(c1024.log2_integral);
  for (std::int64_t n = 2; n <= (1 << 20); n *= 2) {
    const auto c = cost_model(n);
    const double lg = std::log2(static_cast<double>(n));
    CHECK(c.arithmetic_intensity == (4.0 + 5.0 * lg) / 8.0);
  }
}

TEST_CASE("cost model for non-powers of two and invalid sizes") {
  const auto c = cost_model(100);
  CHECK_FALSE(c.log2_integral);
  CHECK(c.flops == doctest::Approx(400.0 + 500.0 * std::log2(100.0)));
  CHECK_THROWS_AS(cost_model(0), std::invalid_argument);
  CHECK_THROWS_AS(cost_model(-8), std::invalid_argument);
}

TEST_CASE("dense versus ACDC model ratio") {
  const auto dense = dense_cost_model(4096, 128);
  const auto acdc = cost_model(4096, 128);
  CHECK(dense.flops / acdc.flops == doctest::Approx(2.0 * 4096 / (4 + 5 * 12)));
  CHECK(dense.flops / acdc.flops == 128.0);
}

TEST_CASE("bench emits one row per variant and direction") {
  BenchOptions o;
  o.sizes = {16};
  o.batch = 4;
  const auto rows = bench(o);
  REQUIRE(rows.size() == 6);
  for (const auto& r : rows) {
    CHECK(r.median_ns > 0.0);
    CHECK(r.iterations == 20);
    CHECK(r.gflops() > 0.0);
  }
  std::ostringstream csv;
  write_bench_csv(rows, csv);
  const std::string text = csv.str();
  CHECK(text.rfind("variant,direction,N,batch,median_ns,model_flops,model_bytes_cached,model_AI,threads\n", 0) == 0);
  CHECK(text.find("acdc_fast_dct,forward,16,4,") != std::string::npos);
  CHECK(text.find("dense,backward,16,4,") != std::string::npos);
}

TEST_CASE("bench skips variants outside their size limits") {
  BenchOptions o;
  o.sizes = {24};
  o.batch = 2;
  const auto rows = bench(o);
  for (const auto& r : rows) CHECK(r.variant != "acdc_fast_dct");
  CHECK(rows.size() == 4);
}
