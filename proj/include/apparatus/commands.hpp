#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "apparatus/config.hpp"
#include "apparatus/csv.hpp"
#include "apparatus/husimi.hpp"

namespace apparatus {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitVerdict = 3;
inline constexpr int kExitResource = 4;

/// A 1-D cut of a Husimi field along the first azimuth node.
struct Profile {
  std::vector<double> x;
  std::vector<double> values;
  double step = 0;

  std::size_t argmax() const;
  double peak_position() const;
  /// Full width at half maximum around the global peak, linearly interpolated;
  /// a side that never drops below half stops at the grid edge.
  double fwhm() const;
};

/// Radial (field) or polar-angle (spin) profile at azimuth index 0.
Profile profile_of(const HusimiField& field);

struct SupportPair {
  double measure_a = 0, measure_b = 0;
  double base_measure_a = 0, base_measure_b = 0;
  double intersection = 0;       // in dmu
  double base_intersection = 0;  // in dm
  double intersection_fraction() const;  // intersection / min(measure_a, measure_b)
};

/// Supports at fraction * peak of each field.
SupportPair compare_supports(const HusimiField& a, const HusimiField& b, double fraction);

GridPtr fock_dataset_grid(double n_max, int N, const std::optional<GridSpec>& override_spec);
/// Grid for the fixed-Fock superpositions (|1> +- |2>)/sqrt(2).
GridPtr superposition_dataset_grid(int N, const std::optional<GridSpec>& override_spec);
GridPtr spin_dataset_grid(int N, double s0, const std::optional<GridSpec>& override_spec);

/// |<alpha|round(nN)>|^2.
HusimiField fock_field(double n, const CoherentFamily& fam, GridPtr grid);
/// |<alpha|(|1> + sign |2>)/sqrt(2)>|^2.
HusimiField superposition_field(int sign, const CoherentFamily& fam, GridPtr grid);
/// |<Omega|round(ratio S)>|^2.
HusimiField spin_weight_field(double ratio, const CoherentFamily& fam, GridPtr grid);

/// Writes a Husimi field as re_alpha,im_alpha,weight,value or theta,phi,weight,value.
void write_field_csv(const std::filesystem::path& path, const std::string& comment,
                     const HusimiField& field);
void write_profile_csv(const std::filesystem::path& path, const std::string& comment,
                       const Profile& profile, FamilyKind kind);
/// Sum of weight * value over the rows, in file order.
double csv_field_integral(const CsvTable& table);

struct ChecksResult {
  nlohmann::ordered_json report;
  bool pass = true;
};
ChecksResult run_checks();

int cmd_overlap_field(const RunConfig& cfg, const std::filesystem::path& out);
int cmd_overlap_spin(const RunConfig& cfg, const std::filesystem::path& out);
int cmd_compare_maps(const RunConfig& cfg, const std::filesystem::path& out);
int cmd_sweep(const RunConfig& cfg, const std::filesystem::path& out);
int cmd_checks(const RunConfig& cfg, const std::filesystem::path& out);

}  // namespace apparatus
