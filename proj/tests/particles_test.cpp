#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "mvsim/error.hpp"
#include "mvsim/noise.hpp"
#include "mvsim/particles.hpp"
#include "mvsim/reference_models.hpp"

using namespace mvsim;

namespace {

FunctionModel scalar_model(std::function<double(double, double)> b, double sigma) {
  return FunctionModel(
      "test", 1, 1,
      [b](double, std::span<const double> x, const EmpiricalMeasureView& mu, std::span<double> out) {
        out[0] = b(x[0], mu.mean()[0]);
      },
      [sigma](double, std::span<const double>, const EmpiricalMeasureView&, std::span<double> out) {
        out[0] = sigma;
      });
}

struct Stats {
  double mean;
  double se;
};

Stats stats(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, std::sqrt(s / (n - 1.0) / n)};
}

}  // namespace

TEST(EmStep, ZeroCoefficientsIdentity) {
  const ZeroModel model(2, 2);
  const ParticleEnsemble e(0.0, 2, {1.0, 2.0, 3.0, 4.0});
  const std::vector<double> dw{0.3, -0.1, 0.2, 0.5};
  const auto next = em_step(e, 0.1, dw, model);
  EXPECT_EQ(std::vector<double>(next.positions().begin(), next.positions().end()),
            std::vector<double>({1.0, 2.0, 3.0, 4.0}));
  EXPECT_DOUBLE_EQ(next.time(), 0.1);
}

TEST(EmStep, DirectSubstitution) {
  const auto model = scalar_model([](double x, double) { return -x; }, 1.0);
  const ParticleEnsemble e(0.0, 1, {1.0});
  const std::vector<double> dw{0.1};
  EXPECT_DOUBLE_EQ(em_step(e, 0.25, dw, model).positions()[0], 0.85);
}

TEST(EmStep, MeasureFrozenAtStepStart) {
  const auto model = scalar_model([](double, double m) { return m; }, 0.0);
  const ParticleEnsemble e(0.0, 1, {0.0, 2.0});
  const std::vector<double> dw{0.0, 0.0};
  const auto next = em_step(e, 0.5, dw, model);
  EXPECT_DOUBLE_EQ(next.positions()[0], 0.5);
  EXPECT_DOUBLE_EQ(next.positions()[1], 2.5);
}

TEST(EmStep, NonFiniteRaisesWithIndices) {
  const auto model = scalar_model([](double x, double) { return x * x * 1e300; }, 0.0);
  const ParticleEnsemble e(0.0, 1, {0.0, 1e10, 1e20});
  const std::vector<double> dw{0.0, 0.0, 0.0};
  try {
    em_step(e, 1.0, dw, model, ExecPolicy::kSerial, 7);
    FAIL() << "expected IntegrationError";
  } catch (const IntegrationError& err) {
    EXPECT_EQ(err.particle(), 1u);
    EXPECT_EQ(err.step(), 7u);
  }
}

TEST(Ensemble, RejectsNonFinite) {
  EXPECT_THROW(ParticleEnsemble(0.0, 1, {1.0, std::nan("")}), IntegrationError);
}

TEST(Simulate, ZeroCoefficientsKeepInitial) {
  const ZeroModel model;
  const TimeGrid grid(1.0, 8);
  const auto tableau = generate_tableau(1, 0, 5, 1, grid);
  const auto init = sample_initial({0.0, 1.0, 1}, 1, 0, 5);
  const auto record = simulate(model, grid, init, tableau);
  ASSERT_EQ(record.snapshots.size(), 9u);
  for (const auto& s : record.snapshots) {
    EXPECT_EQ(s.positions, std::vector<double>(init.positions().begin(), init.positions().end()));
  }
}

TEST(Simulate, DeterministicEulerProduct) {
  const auto model = scalar_model([](double x, double) { return -x; }, 0.0);
  const TimeGrid grid(1.0, 4);
  const auto tableau = generate_tableau(1, 0, 1, 1, grid);
  const ParticleEnsemble init(0.0, 1, {1.0});
  const auto record = simulate(model, grid, init, tableau, SnapshotSchedule::terminal());
  EXPECT_DOUBLE_EQ(record.snapshots.back().positions[0], 0.31640625);
  // scalar oracle
  double x = 1.0;
  for (int j = 0; j < 4; ++j) x += 0.25 * (-x);
  EXPECT_DOUBLE_EQ(record.snapshots.back().positions[0], x);
}

TEST(Simulate, MeanFollowsConstantDriftAndNoise) {
  const double c = 0.7, sigma = 0.4;
  const auto model = scalar_model([c](double, double) { return c; }, sigma);
  const TimeGrid grid(1.0, 10);
  const std::size_t n = 50;
  const auto tableau = generate_tableau(5, 0, n, 1, grid);
  const auto init = sample_initial({0.3, 2.0, 1}, 5, 0, n);
  const auto record = simulate(model, grid, init, tableau);
  const auto inc = coarsen(tableau, grid);
  const double m0 =
      std::accumulate(init.positions().begin(), init.positions().end(), 0.0) / double(n);
  double noise = 0.0;
  for (std::size_t k = 0; k <= 10; ++k) {
    const auto& s = record.at_node(k);
    const double mean = std::accumulate(s.positions.begin(), s.positions.end(), 0.0) / double(n);
    EXPECT_NEAR(mean, m0 + c * double(k) * 0.1 + sigma / double(n) * noise, 1e-12);
    if (k < 10) {
      for (std::size_t i = 0; i < n; ++i) noise += inc.at(k, i, 0);
    }
  }
}

TEST(Simulate, DeterministicRecords) {
  const auto setup = find_model("ou-linear").make(find_model("ou-linear").defaults);
  const TimeGrid grid(1.0, 16);
  const auto tableau = generate_tableau(3, 2, 40, 1, grid);
  const auto init = sample_initial(setup.initial, 3, 2, 40);
  EXPECT_EQ(simulate(*setup.model, grid, init, tableau),
            simulate(*setup.model, grid, init, generate_tableau(3, 2, 40, 1, grid)));
}

TEST(Simulate, ExchangeableUnderPermutation) {
  const HolderDriftModel model(-1.0, 0.5, 0.2, 0.8);
  const TimeGrid grid(1.0, 16);
  const std::size_t n = 8;
  const auto tableau = generate_tableau(4, 0, n, 1, grid);
  const auto init = sample_initial({0.0, 1.0, 1}, 4, 0, n);
  const std::vector<std::size_t> perm{3, 7, 0, 5, 1, 6, 2, 4};
  std::vector<double> pinit(n), pinc;
  for (std::size_t i = 0; i < n; ++i) pinit[i] = init.positions()[perm[i]];
  for (std::size_t i = 0; i < n; ++i) {
    const auto path = tableau.path(perm[i]);
    pinc.insert(pinc.end(), path.begin(), path.end());
  }
  const NoiseTableau ptab(4, 0, n, 1, grid, pinc);
  const auto a = simulate(model, grid, init, tableau, SnapshotSchedule::terminal());
  const auto b = simulate(model, grid, ParticleEnsemble(0.0, 1, pinit), ptab,
                          SnapshotSchedule::terminal());
  for (std::size_t i = 0; i < n; ++i) {
    // Only the frozen mean differs in summation order; allow a few ulps.
    EXPECT_NEAR(b.snapshots.back().positions[i], a.snapshots.back().positions[perm[i]], 1e-13);
  }
}

TEST(Schedule, SupScheduleNodes) {
  EXPECT_EQ(SnapshotSchedule::sup_schedule().resolve(TimeGrid(1.0, 8)).size(), 9u);
  const auto nodes = SnapshotSchedule::sup_schedule().resolve(TimeGrid(1.0, 128));
  ASSERT_EQ(nodes.size(), 17u);
  EXPECT_EQ(nodes.front(), 0u);
  EXPECT_EQ(nodes[1], 8u);
  EXPECT_EQ(nodes.back(), 128u);
  EXPECT_EQ(SnapshotSchedule::at_time(0.5).resolve(TimeGrid(1.0, 8)), std::vector<std::size_t>{4});
  EXPECT_THROW(SnapshotSchedule::at_time(0.3).resolve(TimeGrid(1.0, 8)), DomainError);
}

TEST(Coupled, SchemeMarginalUnperturbed) {
  const auto setup = find_model("ou-linear").make(find_model("ou-linear").defaults);
  const TimeGrid grid(1.0, 8);
  const auto tableau = generate_tableau(6, 1, 30, 1, TimeGrid(1.0, 64));
  const auto init = sample_initial(setup.initial, 6, 1, 30);
  const auto plain = simulate(*setup.model, grid, init, tableau);
  EXPECT_EQ(simulate_coupled_ou(*setup.model, setup.initial, grid, tableau).scheme, plain);
  EXPECT_EQ(simulate_coupled_fine(*setup.model, setup.initial, grid, 8, tableau).scheme, plain);
}

TEST(Coupled, DeterministicNoiseFreeCaseIsExact) {
  const auto setup = find_model("ou-linear").make({0.0, 0.0, 0.0, 1.5, 0.0});
  const TimeGrid grid(1.0, 4);
  const auto tableau = generate_tableau(6, 1, 3, 1, TimeGrid(1.0, 16));
  const auto rec = simulate_coupled_ou(*setup.model, setup.initial, grid, tableau);
  for (std::size_t k = 0; k < rec.scheme.snapshots.size(); ++k) {
    EXPECT_EQ(rec.scheme.snapshots[k].positions, rec.reference.snapshots[k].positions);
  }
}

TEST(Coupled, FineReferenceOfZeroModelIsIdentical) {
  const ZeroModel model;
  const TimeGrid grid(1.0, 4);
  const auto tableau = generate_tableau(2, 0, 5, 1, TimeGrid(1.0, 32));
  const auto rec = simulate_coupled_fine(model, {1.0, 0.5, 1}, grid, 8, tableau);
  for (std::size_t k = 0; k < rec.scheme.snapshots.size(); ++k) {
    EXPECT_EQ(rec.scheme.snapshots[k].positions, rec.reference.snapshots[k].positions);
  }
}

TEST(Coupled, RejectsNonLinearModel) {
  const HolderDriftModel model(-1.0, 0.5, 0.0, 1.0);
  const auto tableau = generate_tableau(2, 0, 5, 1, TimeGrid(1.0, 8));
  EXPECT_THROW(simulate_coupled_ou(model, {0.0, 1.0, 1}, TimeGrid(1.0, 8), tableau),
               UnsupportedModelError);
  EXPECT_THROW(simulate_coupled_fine(model, {0.0, 1.0, 1}, TimeGrid(1.0, 8), 1, tableau),
               DomainError);
}

TEST(Coupled, ExactReferenceStationaryVariance) {
  // bbar = 0: reference is an exact OU process; start in stationarity and
  // pool the terminal values over many particles.
  const double a = -2.0, sigma = 1.0;
  const auto setup = find_model("ou-linear").make({a, 0.0, sigma, 0.0, sigma * sigma / (-2 * a)});
  const TimeGrid grid(1.0, 2);
  const auto tableau = generate_tableau(31, 0, 100000, 1, TimeGrid(1.0, 2));
  const auto rec = simulate_coupled_ou(*setup.model, setup.initial, grid, tableau,
                                       SnapshotSchedule::terminal());
  double s = 0.0;
  for (double x : rec.reference.snapshots.back().positions) s += x * x;
  EXPECT_NEAR(s / 100000.0, sigma * sigma / (-2 * a), 0.02 * 0.25);
}

TEST(Coupled, GapShrinksUnderRefinement) {
  const auto setup = find_model("ou-attract").make(find_model("ou-attract").defaults);
  const std::size_t n_particles = 1024, reps = 200;
  std::vector<double> coarse(reps), fine(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const auto tableau = generate_tableau(12, r, n_particles, 1, TimeGrid(1.0, 16));
    for (std::size_t n : {8u, 16u}) {
      const auto rec = simulate_coupled_ou(*setup.model, setup.initial, TimeGrid(1.0, n), tableau,
                                           SnapshotSchedule::terminal());
      const double gap =
          rec.scheme.snapshots.back().positions[0] - rec.reference.snapshots.back().positions[0];
      (n == 8 ? coarse : fine)[r] = gap * gap;
    }
  }
  const auto c = stats(coarse), f = stats(fine);
  EXPECT_LE(f.mean, c.mean + 2.0 * std::hypot(c.se, f.se));
}

TEST(Coupled, FineReferenceAgreesWithExact) {
  const auto setup = find_model("ou-linear").make(find_model("ou-linear").defaults);
  const std::size_t n_particles = 64, reps = 200;
  const TimeGrid grid(1.0, 8);
  std::vector<double> exact(reps), fine(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const auto tableau = generate_tableau(21, r, n_particles, 1, TimeGrid(1.0, 512));
    const auto e = simulate_coupled_ou(*setup.model, setup.initial, grid, tableau,
                                       SnapshotSchedule::terminal());
    const auto f = simulate_coupled_fine(*setup.model, setup.initial, grid, 64, tableau,
                                         SnapshotSchedule::terminal());
    const double ge = e.scheme.snapshots.back().positions[0] - e.reference.snapshots.back().positions[0];
    const double gf = f.scheme.snapshots.back().positions[0] - f.reference.snapshots.back().positions[0];
    exact[r] = ge * ge;
    fine[r] = gf * gf;
  }
  const auto se = stats(exact), sf = stats(fine);
  EXPECT_NEAR(sf.mean, se.mean, 3.0 * std::hypot(se.se, sf.se));
}

TEST(Export, CsvAndBinaryRoundTrip) {
  const auto setup = find_model("ou-linear").make(find_model("ou-linear").defaults);
  const TimeGrid grid(1.0, 4);
  const auto tableau = generate_tableau(8, 3, 3, 1, grid);
  const auto record = simulate(*setup.model, grid, sample_initial(setup.initial, 8, 3, 3), tableau);
  std::ostringstream csv;
  write_trajectory_csv(record, csv);
  const auto text = csv.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "replication,time,particle,coordinate,value");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 5 * 3);
  const auto path = std::filesystem::temp_directory_path() / "mvsim_traj_test.bin";
  write_trajectory_binary(record, path);
  const auto back = read_trajectory_binary(path);
  EXPECT_EQ(back, record);
  EXPECT_EQ(back.provenance.seed, 8u);
  EXPECT_EQ(back.provenance.replication, 3u);
  std::filesystem::remove(path);
}
