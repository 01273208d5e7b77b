#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "latdens/compositional.hpp"
#include "latdens/mcem.hpp"
#include "latdens/model.hpp"
#include "latdens/simulation.hpp"

namespace latdens::io {

/// Malformed input file; carries the offending line number in the message.
class ParseError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// All numeric output uses %.17g so values round-trip exactly and repeated
// runs are byte-identical.
std::string format_double(double value);

/// Rows of a "group_id,value" CSV, groups in order of first appearance.
struct SampleTable {
    std::vector<std::string> group_ids;
    std::vector<std::vector<double>> values;
};
SampleTable read_sample_csv(const std::string& path);

/// Rows of a "group_id,category,count" CSV; groups and categories in order
/// of first appearance, counts dense over all categories seen.
struct CountTable {
    std::vector<std::string> group_ids;
    std::vector<std::string> categories;
    std::vector<Eigen::VectorXi> counts;
};
CountTable read_count_csv(const std::string& path);

// Grid functions serialize as CSV (cell_midpoint, value) preceded by a
// one-line JSON header comment: # {"lower":..,"upper":..,"n_cells":..}.
void write_grid_function_csv(const std::string& path, const GridFunction& f);
GridFunction read_grid_function_csv(const std::string& path);

void write_model_json(const std::string& path, const LatentDensityModel& model,
                      const nlohmann::json& metadata);
struct ModelFile {
    LatentDensityModel model;
    int iterations = 0;
    bool converged = false;
    double final_nu_change = 0.0;
    double final_sigma_change = 0.0;
};
ModelFile read_model_json(const std::string& path);

// PCA exports into a directory: pca_mean.csv, pca_eigenfunctions.csv
// (cell x component), eigenvalues.csv (with cumulative variance
// fractions), and scores.csv (group_id, z_1..z_K). Only the components
// scored (or all positive ones when scores are absent) are written.
void write_pca_exports(const std::string& dir, const PCARepresentation& pca,
                       const std::vector<std::string>& group_ids);

// densities.csv: long format (group_id, cell_midpoint, density).
void write_densities_csv(const std::string& path,
                         const std::vector<std::string>& group_ids,
                         const std::vector<Density>& densities);

void write_trace_csv(const std::string& path, const McemTrace& trace);

void write_study_csv(const std::string& path, const std::vector<StudyRow>& rows);
void write_study_summary_json(const std::string& path,
                              const std::vector<StudySummaryRow>& summary);

// Compositional exports: composition_mean.csv (category, probability),
// composition_components.csv (category, direction_k probabilities),
// eigenvalues.csv and scores.csv.
void write_compositional_exports(const std::string& dir,
                                 const CompositionalFit& fit,
                                 const std::vector<std::string>& group_ids,
                                 const std::vector<std::string>& categories);

}  // namespace latdens::io
