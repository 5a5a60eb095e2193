#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tnd {

/// Planar location in kilometres (x east, y north).
struct Point {
  double x_km = 0.0;
  double y_km = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

double distance_km(const Point& a, const Point& b);

/// Travel time in minutes along the straight segment a-b at `speed_kmh`.
double euclidean_minutes(const Point& a, const Point& b, double speed_kmh);

struct Centroid {
  int id = 0;
  Point location;

  friend bool operator==(const Centroid&, const Centroid&) = default;
};

/// A destination. `weight` counts the amenities aggregated at this point.
struct Poi {
  int id = 0;
  Point location;
  double weight = 1.0;

  friend bool operator==(const Poi&, const Poi&) = default;
};

enum class StopKind { metro, bus_candidate };

struct Stop {
  int id = 0;
  Point location;
  StopKind kind = StopKind::bus_candidate;

  friend bool operator==(const Stop&, const Stop&) = default;
};

struct MetroLine {
  int id = 0;
  std::vector<int> stops;  // ordered metro stop ids
  double headway_min = 5.0;

  friend bool operator==(const MetroLine&, const MetroLine&) = default;
};

/// Physical constants and problem size. Defaults reproduce the reference
/// parameter table (72 stops come from the grid, not from here).
struct ScenarioParams {
  double walk_speed_kmh = 4.5;
  double bus_speed_kmh = 28.0;
  double metro_speed_kmh = 36.0;
  int fleet_per_line = 10;
  double t_max_min = 30.0;
  int num_lines = 3;
  double centroid_spacing_km = 1.0;
  std::uint64_t rng_seed = 0;
  /// Added to every bus headway; models layover at the terminus.
  double terminal_time_min = 0.0;

  friend bool operator==(const ScenarioParams&, const ScenarioParams&) = default;
};

/// The study area. Treated as immutable once validated.
struct Scenario {
  std::vector<Centroid> centroids;
  std::vector<Poi> pois;
  std::vector<Stop> stops;
  std::vector<MetroLine> metro_lines;
  ScenarioParams params;

  /// Ids of bus-candidate stops in ascending order.
  std::vector<int> candidate_stop_ids() const;
  std::size_t num_candidates() const;
  double total_poi_weight() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Throws ValidationError describing the first violated invariant.
void validate(const Scenario& scenario);

struct GridSpec {
  int width_cells = 12;
  int height_cells = 6;
  double spacing_km = 1.0;
  /// Each metro line is a path of cell indices (row * width + col); a station
  /// is placed at the cell centre and shared by every line naming that cell.
  std::vector<std::vector<int>> metro_spec;
  double metro_headway_min = 5.0;
  /// Expected PoI count per cell; realised by stochastic rounding.
  std::vector<double> poi_density;
  std::uint64_t seed = 0;
  ScenarioParams params;
};

/// Builds a square-tile scenario: one centroid at each cell centre, one
/// bus-candidate stop uniformly inside each cell, PoIs per cell from the
/// density map. Pure function of `spec`.
Scenario generate_grid_scenario(const GridSpec& spec);

/// Density `base + peak * exp(-r^2 / (2 sigma^2))`, r the distance in cells
/// from the grid centre. Row-major, width * height entries.
std::vector<double> center_heavy_density(int width_cells, int height_cells, double base, double peak,
                                         double sigma_cells);

/// 12 x 6 grid (72 candidate stops), k = 3, four metro lines of different
/// lengths crossing the centre, PoIs concentrated downtown.
GridSpec reference_grid_spec(std::uint64_t seed);

/// 6 x 6 grid (36 candidate stops), k = 2, one metro line through the centre.
GridSpec desk_grid_spec(std::uint64_t seed);

void save_scenario(const Scenario& scenario, const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

std::string scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const std::string& text);

}  // namespace tnd
