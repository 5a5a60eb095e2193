#include "tnd/territory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json_fields.hpp"
#include "tnd/error.hpp"
#include "tnd/rng.hpp"

namespace tnd {

double distance_km(const Point& a, const Point& b) {
  return std::hypot(a.x_km - b.x_km, a.y_km - b.y_km);
}

double euclidean_minutes(const Point& a, const Point& b, double speed_kmh) {
  return 60.0 * distance_km(a, b) / speed_kmh;
}

std::vector<int> Scenario::candidate_stop_ids() const {
  std::vector<int> ids;
  for (const auto& s : stops)
    if (s.kind == StopKind::bus_candidate) ids.push_back(s.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::size_t Scenario::num_candidates() const {
  return static_cast<std::size_t>(std::count_if(stops.begin(), stops.end(), [](const Stop& s) {
    return s.kind == StopKind::bus_candidate;
  }));
}

double Scenario::total_poi_weight() const {
  double total = 0.0;
  for (const auto& p : pois) total += p.weight;
  return total;
}

namespace {

bool finite(const Point& p) { return std::isfinite(p.x_km) && std::isfinite(p.y_km); }

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

}  // namespace

void validate(const Scenario& s) {
  const auto& p = s.params;
  require(std::isfinite(p.walk_speed_kmh) && p.walk_speed_kmh > 0, "walk_speed_kmh must be > 0");
  require(std::isfinite(p.bus_speed_kmh) && p.bus_speed_kmh > 0, "bus_speed_kmh must be > 0");
  require(std::isfinite(p.metro_speed_kmh) && p.metro_speed_kmh > 0, "metro_speed_kmh must be > 0");
  require(p.fleet_per_line >= 1, "fleet_per_line must be >= 1");
  require(std::isfinite(p.t_max_min) && p.t_max_min > 0, "t_max_min must be > 0");
  require(p.num_lines >= 1, "num_lines must be >= 1");
  require(std::isfinite(p.centroid_spacing_km) && p.centroid_spacing_km > 0,
          "centroid_spacing_km must be > 0");
  require(std::isfinite(p.terminal_time_min) && p.terminal_time_min >= 0,
          "terminal_time_min must be >= 0");
  require(!s.centroids.empty(), "scenario has no centroids");

  std::set<int> ids;
  for (const auto& c : s.centroids) {
    require(finite(c.location), "centroid " + std::to_string(c.id) + " has non-finite coordinates");
    require(ids.insert(c.id).second, "duplicate centroid id " + std::to_string(c.id));
  }
  ids.clear();
  for (const auto& poi : s.pois) {
    require(finite(poi.location), "poi " + std::to_string(poi.id) + " has non-finite coordinates");
    require(std::isfinite(poi.weight) && poi.weight >= 0,
            "poi " + std::to_string(poi.id) + " has negative weight");
    require(ids.insert(poi.id).second, "duplicate poi id " + std::to_string(poi.id));
  }
  ids.clear();
  std::set<int> metro_ids;
  std::size_t candidates = 0;
  for (const auto& st : s.stops) {
    require(finite(st.location), "stop " + std::to_string(st.id) + " has non-finite coordinates");
    require(ids.insert(st.id).second, "duplicate stop id " + std::to_string(st.id));
    if (st.kind == StopKind::metro)
      metro_ids.insert(st.id);
    else
      ++candidates;
  }
  require(static_cast<std::size_t>(p.num_lines) <= candidates,
          "num_lines exceeds the number of candidate stops");
  ids.clear();
  for (const auto& line : s.metro_lines) {
    const auto tag = "metro line " + std::to_string(line.id);
    require(ids.insert(line.id).second, "duplicate " + tag);
    require(line.stops.size() >= 2, tag + " needs at least 2 stops");
    require(std::isfinite(line.headway_min) && line.headway_min > 0, tag + " headway must be > 0");
    std::set<int> seen;
    for (int id : line.stops) {
      require(metro_ids.count(id) == 1, tag + " references non-metro stop " + std::to_string(id));
      require(seen.insert(id).second, tag + " visits stop " + std::to_string(id) + " twice");
    }
  }
}

Scenario generate_grid_scenario(const GridSpec& spec) {
  if (spec.width_cells < 1 || spec.height_cells < 1)
    throw ValidationError("grid must have at least one cell");
  if (!(spec.spacing_km > 0)) throw ValidationError("grid spacing must be > 0");
  const int cells = spec.width_cells * spec.height_cells;
  if (static_cast<int>(spec.poi_density.size()) != cells)
    throw ValidationError("poi_density has " + std::to_string(spec.poi_density.size()) +
                          " entries, expected " + std::to_string(cells));
  for (double d : spec.poi_density)
    if (!std::isfinite(d) || d < 0) throw ValidationError("poi_density entries must be >= 0");

  Scenario s;
  s.params = spec.params;
  s.params.centroid_spacing_km = spec.spacing_km;
  s.params.rng_seed = spec.seed;

  const double h = spec.spacing_km;
  auto cell_origin = [&](int cell) {
    return Point{(cell % spec.width_cells) * h, (cell / spec.width_cells) * h};
  };

  Rng root(spec.seed);
  Rng stop_rng = root.derive("bus-stops");
  Rng poi_rng = root.derive("pois");

  for (int cell = 0; cell < cells; ++cell) {
    const Point o = cell_origin(cell);
    s.centroids.push_back({cell, {o.x_km + 0.5 * h, o.y_km + 0.5 * h}});
  }

  // Candidate stop ids equal their cell index.
  for (int cell = 0; cell < cells; ++cell) {
    const Point o = cell_origin(cell);
    auto inside = [&] {
      double u = stop_rng.uniform01();
      while (u <= 0.0) u = stop_rng.uniform01();
      return u;
    };
    const double ux = inside();
    const double uy = inside();
    s.stops.push_back({cell, {o.x_km + ux * h, o.y_km + uy * h}, StopKind::bus_candidate});
  }

  int poi_id = 0;
  for (int cell = 0; cell < cells; ++cell) {
    const Point o = cell_origin(cell);
    const double d = spec.poi_density[static_cast<std::size_t>(cell)];
    const double whole = std::floor(d);
    const int count = static_cast<int>(whole) + (poi_rng.bernoulli(d - whole) ? 1 : 0);
    for (int i = 0; i < count; ++i) {
      const double ux = poi_rng.uniform01();
      const double uy = poi_rng.uniform01();
      s.pois.push_back({poi_id++, {o.x_km + ux * h, o.y_km + uy * h}, 1.0});
    }
  }

  // Metro stations follow the candidate ids; a cell shared by several lines
  // yields one interchange station.
  std::vector<int> station_of_cell(static_cast<std::size_t>(cells), -1);
  int next_stop_id = cells;
  int line_id = 1;
  for (const auto& path : spec.metro_spec) {
    MetroLine line;
    line.id = line_id++;
    line.headway_min = spec.metro_headway_min;
    for (int cell : path) {
      if (cell < 0 || cell >= cells)
        throw ValidationError("invalid metro spec: cell " + std::to_string(cell) +
                              " outside grid of " + std::to_string(cells) + " cells");
      auto& station = station_of_cell[static_cast<std::size_t>(cell)];
      if (station < 0) {
        station = next_stop_id++;
        s.stops.push_back({station, s.centroids[static_cast<std::size_t>(cell)].location,
                           StopKind::metro});
      }
      line.stops.push_back(station);
    }
    s.metro_lines.push_back(std::move(line));
  }

  validate(s);
  return s;
}

// --- persistence ----------------------------------------------------------

namespace {

using nlohmann::json;
using detail::field;

json point_fields(int id, const Point& p) {
  return json{{"id", id}, {"x_km", p.x_km}, {"y_km", p.y_km}};
}

Point read_point(const json& j, const std::string& where) {
  return {field<double>(j, "x_km", where), field<double>(j, "y_km", where)};
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
  json root;
  root["version"] = 1;
  const auto& p = s.params;
  root["params"] = {
      {"walk_speed_kmh", p.walk_speed_kmh},
      {"bus_speed_kmh", p.bus_speed_kmh},
      {"metro_speed_kmh", p.metro_speed_kmh},
      {"fleet_per_line", p.fleet_per_line},
      {"t_max_min", p.t_max_min},
      {"num_lines", p.num_lines},
      {"centroid_spacing_km", p.centroid_spacing_km},
      {"rng_seed", p.rng_seed},
      {"terminal_time_min", p.terminal_time_min},
  };
  json centroids = json::array();
  for (const auto& c : s.centroids) centroids.push_back(point_fields(c.id, c.location));
  root["centroids"] = std::move(centroids);

  json pois = json::array();
  for (const auto& poi : s.pois) {
    auto j = point_fields(poi.id, poi.location);
    j["weight"] = poi.weight;
    pois.push_back(std::move(j));
  }
  root["pois"] = std::move(pois);

  json stops = json::array();
  for (const auto& st : s.stops) {
    auto j = point_fields(st.id, st.location);
    j["kind"] = st.kind == StopKind::metro ? "metro" : "bus_candidate";
    stops.push_back(std::move(j));
  }
  root["stops"] = std::move(stops);

  json lines = json::array();
  for (const auto& line : s.metro_lines)
    lines.push_back({{"id", line.id}, {"stops", line.stops}, {"headway_min", line.headway_min}});
  root["metro_lines"] = std::move(lines);
  return root.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("scenario root must be an object");

  Scenario s;
  const auto& params = detail::child(root, "params", "");
  s.params.walk_speed_kmh = field<double>(params, "walk_speed_kmh", "params");
  s.params.bus_speed_kmh = field<double>(params, "bus_speed_kmh", "params");
  s.params.metro_speed_kmh = field<double>(params, "metro_speed_kmh", "params");
  s.params.fleet_per_line = field<int>(params, "fleet_per_line", "params");
  s.params.t_max_min = field<double>(params, "t_max_min", "params");
  s.params.num_lines = field<int>(params, "num_lines", "params");
  s.params.centroid_spacing_km = field<double>(params, "centroid_spacing_km", "params");
  s.params.rng_seed = detail::optional_field<std::uint64_t>(params, "rng_seed", "params", 0);
  s.params.terminal_time_min =
      detail::optional_field<double>(params, "terminal_time_min", "params", 0.0);

  const auto& centroids = detail::array_child(root, "centroids", "");
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    const auto where = "centroids[" + std::to_string(i) + "]";
    s.centroids.push_back({field<int>(centroids[i], "id", where), read_point(centroids[i], where)});
  }
  const auto& pois = detail::array_child(root, "pois", "");
  for (std::size_t i = 0; i < pois.size(); ++i) {
    const auto where = "pois[" + std::to_string(i) + "]";
    s.pois.push_back({field<int>(pois[i], "id", where), read_point(pois[i], where),
                      detail::optional_field<double>(pois[i], "weight", where, 1.0)});
  }
  const auto& stops = detail::array_child(root, "stops", "");
  for (std::size_t i = 0; i < stops.size(); ++i) {
    const auto where = "stops[" + std::to_string(i) + "]";
    const auto kind = field<std::string>(stops[i], "kind", where);
    Stop st{field<int>(stops[i], "id", where), read_point(stops[i], where), StopKind::metro};
    if (kind == "bus_candidate")
      st.kind = StopKind::bus_candidate;
    else if (kind != "metro")
      throw ParseError(where + ".kind: unknown stop kind '" + kind + "'");
    s.stops.push_back(st);
  }
  const auto& lines = detail::array_child(root, "metro_lines", "");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto where = "metro_lines[" + std::to_string(i) + "]";
    MetroLine line;
    line.id = field<int>(lines[i], "id", where);
    line.stops = field<std::vector<int>>(lines[i], "stops", where);
    line.headway_min = detail::optional_field<double>(lines[i], "headway_min", where, 5.0);
    s.metro_lines.push_back(std::move(line));
  }

  validate(s);
  return s;
}

std::vector<double> center_heavy_density(int width_cells, int height_cells, double base, double peak,
                                         double sigma_cells) {
  if (width_cells < 1 || height_cells < 1) throw ValidationError("grid must have at least one cell");
  if (!(sigma_cells > 0)) throw ValidationError("density sigma must be > 0");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(width_cells * height_cells));
  const double cx = 0.5 * (width_cells - 1);
  const double cy = 0.5 * (height_cells - 1);
  for (int row = 0; row < height_cells; ++row) {
    for (int col = 0; col < width_cells; ++col) {
      const double r2 = (col - cx) * (col - cx) + (row - cy) * (row - cy);
      out.push_back(base + peak * std::exp(-r2 / (2.0 * sigma_cells * sigma_cells)));
    }
  }
  return out;
}

namespace {

std::vector<int> row_path(int width, int row, int col_from, int col_to) {
  std::vector<int> cells;
  for (int c = col_from; c <= col_to; ++c) cells.push_back(row * width + c);
  return cells;
}

std::vector<int> column_path(int width, int col, int row_from, int row_to) {
  std::vector<int> cells;
  for (int r = row_from; r <= row_to; ++r) cells.push_back(r * width + col);
  return cells;
}

}  // namespace

GridSpec reference_grid_spec(std::uint64_t seed) {
  GridSpec g;
  g.width_cells = 12;
  g.height_cells = 6;
  g.seed = seed;
  g.params.num_lines = 3;
  g.metro_spec = {row_path(12, 2, 2, 9), column_path(12, 5, 0, 5), row_path(12, 4, 4, 8),
                  {2 * 12 + 7, 3 * 12 + 7, 4 * 12 + 8}};
  g.poi_density = center_heavy_density(12, 6, 0.5, 4.0, 2.5);
  return g;
}

GridSpec desk_grid_spec(std::uint64_t seed) {
  GridSpec g;
  g.width_cells = 6;
  g.height_cells = 6;
  g.seed = seed;
  g.params.num_lines = 2;
  g.metro_spec = {row_path(6, 2, 1, 4)};
  g.poi_density = center_heavy_density(6, 6, 0.3, 3.0, 1.5);
  return g;
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  detail::write_text_file(path, scenario_to_json(scenario));
}

Scenario load_scenario(const std::filesystem::path& path) {
  return scenario_from_json(detail::read_text_file(path));
}

}  // namespace tnd
