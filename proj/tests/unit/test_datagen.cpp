#include <doctest.h>

#include <map>

#include "otval/datagen.hpp"
#include "otval/error.hpp"

using namespace otval;

namespace {

LabeledDataset pool(int classes, Index per, Index dim, std::uint64_t seed) {
  return gaussian_blobs(classes, per, class_means(classes, dim, 3.0, seed), Matrix::Identity(dim, dim),
                        seed + 1);
}

std::map<int, Index> label_counts(const LabeledDataset& d) {
  std::map<int, Index> c;
  for (int y : d.labels) ++c[y];
  return c;
}

}  // namespace

TEST_CASE("gaussian blobs") {
  Matrix means(3, 2);
  means << 0, 0, 6, 0, 3, 5;
  const LabeledDataset d = gaussian_blobs(3, 100, means, Matrix::Identity(2, 2), 1);
  CHECK(d.size() == 300);
  CHECK(d.dim() == 2);
  CHECK(label_counts(d).at(2) == 100);
  const LabeledDataset again = gaussian_blobs(3, 100, means, Matrix::Identity(2, 2), 1);
  CHECK(again.features == d.features);
  CHECK(again.labels == d.labels);

  const LabeledDataset flat = gaussian_blobs(1, 10, means.topRows(1), Matrix::Zero(2, 2), 2);
  CHECK(flat.features.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(gaussian_blobs(1, 5, means.topRows(1), -Matrix::Identity(2, 2), 3), InputError);
}

TEST_CASE("noise injection") {
  const LabeledDataset base = pool(4, 250, 3, 5);
  SUBCASE("fraction zero is the identity") {
    const NoisedDataset n = inject_noise(base, 0.0, NoiseKind::kFeature, 1.0, 1);
    CHECK(n.noisy.empty());
    CHECK(n.data.features == base.features);
  }
  SUBCASE("every label changes at fraction one") {
    const NoisedDataset n = inject_noise(base, 1.0, NoiseKind::kLabel, 1.0, 2);
    CHECK(n.noisy.size() == 1000);
    for (Index i = 0; i < base.size(); ++i) {
      CHECK(n.data.labels[static_cast<std::size_t>(i)] != base.labels[static_cast<std::size_t>(i)]);
    }
    CHECK(n.data.features == base.features);
  }
  SUBCASE("exact counts; clean rows untouched") {
    const NoisedDataset n = inject_noise(base, 0.15, NoiseKind::kFeature, 1.0, 3);
    CHECK(n.noisy.size() == 150);
    CHECK(std::is_sorted(n.noisy.begin(), n.noisy.end()));
    std::vector<bool> hit(1000, false);
    for (Index i : n.noisy) hit[static_cast<std::size_t>(i)] = true;
    for (Index i = 0; i < 1000; ++i) {
      const bool same = n.data.features.row(i) == base.features.row(i);
      CHECK(same == !hit[static_cast<std::size_t>(i)]);
    }
    const NoisedDataset again = inject_noise(base, 0.15, NoiseKind::kFeature, 1.0, 3);
    CHECK(again.noisy == n.noisy);
    CHECK(again.data.features == n.data.features);
  }
  CHECK(noise_count(0.2, 200) == 40);
  CHECK(noise_count(0.05, 30) == 2);
  CHECK(noise_count(0.1, 1000) == 100);
  CHECK_THROWS_AS(inject_noise(base, 1.5, NoiseKind::kFeature, 1.0, 1), InputError);
  CHECK_THROWS_AS(inject_noise(pool(1, 5, 2, 1), 0.5, NoiseKind::kLabel, 1.0, 1), InputError);
}

TEST_CASE("standard cases") {
  const LabeledDataset base = pool(10, 400, 4, 9);
  SUBCASE("case 1: equal class counts per client") {
    const auto clients = make_case(CaseSpec::standard(1, 5, 200, 10, 11), base);
    REQUIRE(clients.size() == 5);
    for (const auto& c : clients) {
      CHECK(c.data.size() == 200);
      for (const auto& [label, count] : label_counts(c.data)) CHECK(count == 20);
      CHECK(c.noisy.empty());
    }
  }
  SUBCASE("case 2: two dominant classes") {
    const auto clients = make_case(CaseSpec::standard(2, 5, 200, 10, 12), base);
    const auto counts = label_counts(clients[1].data);
    CHECK(counts.at(2) + counts.at(3) == 160);
  }
  SUBCASE("case 3: sizes 10..30 percent") {
    const auto clients = make_case(CaseSpec::standard(3, 5, 200, 10, 13), base);
    const Index expected[] = {100, 150, 200, 250, 300};
    for (std::size_t i = 0; i < 5; ++i) CHECK(clients[i].data.size() == expected[i]);
  }
  SUBCASE("case 4: client 0 unmodified, others relabelled") {
    const CaseSpec spec = CaseSpec::standard(4, 5, 200, 10, 14);
    CaseSpec clean = spec;
    clean.noise_ratios.assign(5, 0.0);
    const auto noisy = make_case(spec, base);
    const auto plain = make_case(clean, base);
    CHECK(noisy[0].data.labels == plain[0].data.labels);
    CHECK(noisy[0].noisy.empty());
    for (std::size_t i = 1; i < 5; ++i) {
      CHECK(noisy[i].noisy.size() == static_cast<std::size_t>(noise_count(spec.noise_ratios[i], 200)));
      CHECK(noisy[i].data.features == plain[i].data.features);
    }
  }
  SUBCASE("case 5: exact number of changed rows") {
    const CaseSpec spec = CaseSpec::standard(5, 5, 200, 10, 15);
    CaseSpec clean = spec;
    clean.noise_ratios.assign(5, 0.0);
    const auto noisy = make_case(spec, base);
    const auto plain = make_case(clean, base);
    CHECK(spec.noise_ratios[4] == doctest::Approx(0.2));
    for (std::size_t i = 0; i < 5; ++i) {
      Index changed = 0;
      for (Index r = 0; r < 200; ++r) changed += noisy[i].data.features.row(r) != plain[i].data.features.row(r);
      CHECK(changed == noise_count(spec.noise_ratios[i], 200));
      CHECK(changed == static_cast<Index>(noisy[i].noisy.size()));
    }
  }
  SUBCASE("determinism") {
    const auto a = make_case(CaseSpec::standard(5, 3, 100, 10, 16), base);
    const auto b = make_case(CaseSpec::standard(5, 3, 100, 10, 16), base);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(a[i].data.features == b[i].data.features);
      CHECK(a[i].noisy == b[i].noisy);
    }
  }
  SUBCASE("short base data is rejected") {
    CHECK_THROWS_AS(make_case(CaseSpec::standard(1, 5, 2000, 10, 17), base), InputError);
  }
  CHECK_THROWS_AS(CaseSpec::standard(6, 5, 200, 10, 1), InputError);
}
