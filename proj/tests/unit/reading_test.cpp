#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "cotrep/error.hpp"
#include "cotrep/model/toy_backend.hpp"
#include "cotrep/reading.hpp"
#include "oracles.hpp"

using namespace cotrep;

TEST_SUITE("reading") {

TEST_CASE("stimulus pairs validate their texts") {
  CHECK_NOTHROW(StimulusPair("a", "neg", "pos"));
  CHECK_THROWS_AS(StimulusPair("a", "same", "same"), Error);
  CHECK_THROWS_AS(StimulusPair("a", "", "pos"), Error);
  CHECK_THROWS_AS(StimulusPair("a", "neg", ""), Error);
}

TEST_CASE("collected activity is the last-token slice of represent") {
  ToyBackend toy({0, 2, 8, 257});
  const std::vector<StimulusPair> pairs{{"p0", "USER: q\nASSISTANT:", "USER: q\nASSISTANT: Let's think step by step."}};
  const auto acts = collect_activity(pairs, toy);
  REQUIRE(acts.size() == 1);
  CHECK(acts[0].negative.n_layers == 2);
  CHECK(acts[0].negative.dim == 8);
  const auto full = toy.represent(pairs[0].positive());
  for (std::size_t l = 0; l < 2; ++l) {
    const auto last = full.at(l, full.n_tokens() - 1);
    CHECK(std::equal(last.begin(), last.end(), acts[0].positive.layer(l).begin()));
  }
}

TEST_CASE("differences subtract negative from positive") {
  const auto planted = oracle::planted_pairs(1, 3, 5, 2, 0.5, 0.05);
  const auto d = differences(planted.pairs);
  REQUIRE(d.per_layer.size() == 2);
  for (std::size_t l = 0; l < 2; ++l) {
    REQUIRE(d.per_layer[l].rows() == 3);
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t j = 0; j < 5; ++j)
        CHECK(d.per_layer[l](k, j) == static_cast<double>(planted.pairs[k].positive.values[l * 5 + j]) -
                                          static_cast<double>(planted.pairs[k].negative.values[l * 5 + j]));
  }
  auto same = planted.pairs;
  same[0].positive = same[0].negative;
  CHECK(differences(same).per_layer[0].row(0).norm() == 0.0);
}

TEST_CASE("first principal component on small cases") {
  Eigen::MatrixXd axis(2, 2);
  axis << 2, 0, -2, 0;
  const auto pc = first_principal_component(axis).direction;
  CHECK(std::abs(pc[0]) == doctest::Approx(1.0));
  CHECK(std::abs(pc[1]) == doctest::Approx(0.0));

  Eigen::MatrixXd single(1, 2);
  single << 3, 4;
  const auto s = first_principal_component(single).direction;
  CHECK(s[0] == doctest::Approx(0.6));
  CHECK(s[1] == doctest::Approx(0.8));

  Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(4, 3);
  try {
    first_principal_component(zeros);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDegenerateInput);
  }
  Eigen::MatrixXd identical(3, 2);
  identical << 1, 2, 1, 2, 1, 2;
  CHECK_THROWS_AS(first_principal_component(identical), Error);
}

TEST_CASE("first principal component matches the covariance eigenvector oracle") {
  std::mt19937_64 rng(12);
  const auto m = oracle::random_matrix(rng, 12, 6);
  const auto pc = first_principal_component(oracle::to_eigen(m));
  CHECK(pc.direction.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(oracle::abs_cosine(oracle::top_covariance_eigenvector(m), pc.direction) >= 1 - 1e-6);
  CHECK(pc.explained_variance > 0.0);
  CHECK(pc.explained_variance <= 1.0);
}

TEST_CASE("wide matrices use the same direction as the oracle") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto m = oracle::random_matrix(rng, 4, 16);
    const auto pc = first_principal_component(oracle::to_eigen(m));
    CHECK(oracle::abs_cosine(oracle::top_covariance_eigenvector(m), pc.direction) >= 1 - 1e-6);
  }
}

TEST_CASE("planted direction is recovered with the correct sign") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto p = oracle::planted_pairs(seed, 64, 16, 2, 0.5, 0.05);
    const auto v = fit_reading_vector(differences(p.pairs));
    for (std::size_t l = 0; l < 2; ++l) {
      double cos = 0;
      for (std::size_t j = 0; j < 16; ++j) cos += v.per_layer[l][static_cast<Eigen::Index>(j)] * p.u[l][j];
      CHECK(cos >= 0.95);
    }
  }
}

TEST_CASE("reading vectors are unit, oriented and stable under scale and order") {
  const auto p = oracle::planted_pairs(3, 32, 8, 3, 0.4, 0.3);
  const auto d = differences(p.pairs);
  const auto v = fit_reading_vector(d);
  for (std::size_t l = 0; l < 3; ++l) {
    CHECK(std::abs(v.per_layer[l].norm() - 1.0) <= 1e-6);
    CHECK((d.per_layer[l] * v.per_layer[l]).mean() >= 0.0);
  }

  auto scaled = d;
  for (auto& m : scaled.per_layer) m *= 7.5;
  const auto vs = fit_reading_vector(scaled);
  auto shuffled = d;
  std::vector<Eigen::Index> order(32);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937(1));
  for (auto& m : shuffled.per_layer) {
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.row(i) = m.row(order[static_cast<std::size_t>(i)]);
    m = out;
  }
  const auto vp = fit_reading_vector(shuffled);
  for (std::size_t l = 0; l < 3; ++l) {
    CHECK((vs.per_layer[l] - v.per_layer[l]).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((vp.per_layer[l] - v.per_layer[l]).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("build_reading_vector uses the first n_read pairs") {
  ToyBackend toy({0, 2, 8, 257});
  std::vector<StimulusPair> pairs;
  for (int i = 0; i < 6; ++i) {
    const std::string q = "USER: question " + std::to_string(i) + "\nASSISTANT:";
    pairs.emplace_back("p" + std::to_string(i), q, q + " Let's think step by step.");
  }
  const auto v4 = build_reading_vector(pairs, toy, 4);
  const auto v4b = build_reading_vector(std::span(pairs).first(4), toy, 4);
  CHECK(v4.provenance.n_pairs == 4);
  CHECK(v4.provenance.backend == toy.descriptor().name);
  CHECK(v4.provenance.stimulus_hash == v4b.provenance.stimulus_hash);
  for (std::size_t l = 0; l < 2; ++l) CHECK(v4.per_layer[l] == v4b.per_layer[l]);
  CHECK(build_reading_vector(pairs, toy, 6).provenance.stimulus_hash != v4.provenance.stimulus_hash);
  CHECK_THROWS_AS(build_reading_vector(pairs, toy, 7), Error);
  CHECK_THROWS_AS(build_reading_vector(pairs, toy, 0), Error);
}

TEST_CASE("reading vector JSON round trips at full precision") {
  const auto p = oracle::planted_pairs(8, 10, 6, 2, 0.5, 0.1);
  auto v = fit_reading_vector(differences(p.pairs));
  v.provenance.backend = "unit";
  v.provenance.seed = 42;
  const auto j = to_json(v);
  CHECK(j["version"] == 1);
  CHECK(j["n_layers"] == 2);
  CHECK(j["dim"] == 6);
  const auto back = reading_vector_from_json(nlohmann::json::parse(j.dump()));
  for (std::size_t l = 0; l < 2; ++l) CHECK(back.per_layer[l] == v.per_layer[l]);
  CHECK(back.flipped == v.flipped);
  CHECK(back.provenance.seed == 42);
  auto broken = j;
  broken["vectors"][0].erase(0);
  CHECK_THROWS_AS(reading_vector_from_json(broken), Error);
}

}
