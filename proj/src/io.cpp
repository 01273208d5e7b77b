#include "latdens/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace latdens::io {

namespace {

using nlohmann::json;

std::string strip(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream stream(line);
    std::string field;
    while (std::getline(stream, field, ',')) fields.push_back(strip(field));
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

double parse_double(const std::string& text, int line_no, const char* what) {
    try {
        std::size_t used = 0;
        double value = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing characters");
        return value;
    } catch (const std::exception&) {
        throw ParseError(std::string("line ") + std::to_string(line_no) +
                         ": cannot parse " + what + " '" + text + "'");
    }
}

long parse_count(const std::string& text, int line_no) {
    try {
        std::size_t used = 0;
        long value = std::stol(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing characters");
        if (value < 0) throw std::invalid_argument("negative");
        return value;
    } catch (const std::exception&) {
        throw ParseError(std::string("line ") + std::to_string(line_no) +
                         ": cannot parse count '" + text + "'");
    }
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open input file '" + path + "'");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    return out;
}

json grid_to_json(const Grid& grid) {
    return json{{"lower", grid.lower()},
                {"upper", grid.upper()},
                {"n_cells", grid.n_cells()}};
}

Grid grid_from_json(const json& j) {
    return Grid(j.at("lower").get<double>(), j.at("upper").get<double>(),
                j.at("n_cells").get<int>());
}

}  // namespace

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

SampleTable read_sample_csv(const std::string& path) {
    std::ifstream in = open_input(path);
    std::string line;
    int line_no = 0;

    if (!std::getline(in, line)) throw ParseError("empty input file '" + path + "'");
    ++line_no;
    auto header = split_csv_line(line);
    if (header.size() != 2 || header[0] != "group_id" || header[1] != "value")
        throw ParseError("line 1: expected header 'group_id,value'");

    SampleTable table;
    std::map<std::string, std::size_t> index;
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 2)
            throw ParseError("line " + std::to_string(line_no) +
                             ": expected 2 fields, got " +
                             std::to_string(fields.size()));
        if (fields[0].empty())
            throw ParseError("line " + std::to_string(line_no) + ": empty group_id");
        double value = parse_double(fields[1], line_no, "value");
        auto [it, inserted] = index.try_emplace(fields[0], table.group_ids.size());
        if (inserted) {
            table.group_ids.push_back(fields[0]);
            table.values.emplace_back();
        }
        table.values[it->second].push_back(value);
    }
    if (table.group_ids.empty()) throw ParseError("no data rows in '" + path + "'");
    return table;
}

CountTable read_count_csv(const std::string& path) {
    std::ifstream in = open_input(path);
    std::string line;
    int line_no = 0;

    if (!std::getline(in, line)) throw ParseError("empty input file '" + path + "'");
    ++line_no;
    auto header = split_csv_line(line);
    if (header.size() != 3 || header[0] != "group_id" || header[1] != "category" ||
        header[2] != "count")
        throw ParseError("line 1: expected header 'group_id,category,count'");

    std::vector<std::string> group_ids;
    std::vector<std::string> categories;
    std::map<std::string, std::size_t> group_index;
    std::map<std::string, std::size_t> category_index;
    // (group, category) -> count, accumulated.
    std::vector<std::map<std::size_t, long>> raw;

    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 3)
            throw ParseError("line " + std::to_string(line_no) +
                             ": expected 3 fields, got " +
                             std::to_string(fields.size()));
        if (fields[0].empty())
            throw ParseError("line " + std::to_string(line_no) + ": empty group_id");
        if (fields[1].empty())
            throw ParseError("line " + std::to_string(line_no) +
                             ": empty category label");
        long count = parse_count(fields[2], line_no);

        auto [git, ginserted] = group_index.try_emplace(fields[0], group_ids.size());
        if (ginserted) {
            group_ids.push_back(fields[0]);
            raw.emplace_back();
        }
        auto [cit, cinserted] =
            category_index.try_emplace(fields[1], categories.size());
        if (cinserted) categories.push_back(fields[1]);
        raw[git->second][cit->second] += count;
    }
    if (group_ids.empty()) throw ParseError("no data rows in '" + path + "'");

    CountTable table;
    table.group_ids = std::move(group_ids);
    table.categories = std::move(categories);
    table.counts.reserve(raw.size());
    for (const auto& per_group : raw) {
        Eigen::VectorXi counts =
            Eigen::VectorXi::Zero(static_cast<int>(table.categories.size()));
        for (const auto& [cat, count] : per_group)
            counts[static_cast<int>(cat)] = static_cast<int>(count);
        table.counts.push_back(std::move(counts));
    }
    return table;
}

void write_grid_function_csv(const std::string& path, const GridFunction& f) {
    std::ofstream out = open_output(path);
    out << "# " << grid_to_json(f.grid()).dump() << "\n";
    out << "cell_midpoint,value\n";
    for (int k = 0; k < f.grid().n_cells(); ++k)
        out << format_double(f.grid().midpoint(k)) << ","
            << format_double(f.values()[k]) << "\n";
}

GridFunction read_grid_function_csv(const std::string& path) {
    std::ifstream in = open_input(path);
    std::string line;
    if (!std::getline(in, line) || line.size() < 2 || line[0] != '#')
        throw ParseError("missing grid header in '" + path + "'");
    Grid grid = [&] {
        try {
            return grid_from_json(json::parse(line.substr(1)));
        } catch (const json::exception& err) {
            throw ParseError("bad grid header in '" + path + "': " + err.what());
        }
    }();
    if (!std::getline(in, line) || split_csv_line(line) !=
        std::vector<std::string>{"cell_midpoint", "value"})
        throw ParseError("line 2: expected header 'cell_midpoint,value'");

    Eigen::VectorXd values(grid.n_cells());
    int k = 0;
    int line_no = 2;
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 2 || k >= grid.n_cells())
            throw ParseError("line " + std::to_string(line_no) + ": unexpected row");
        values[k++] = parse_double(fields[1], line_no, "value");
    }
    if (k != grid.n_cells())
        throw ParseError("expected " + std::to_string(grid.n_cells()) +
                         " value rows, got " + std::to_string(k));
    return GridFunction(grid, std::move(values));
}

void write_model_json(const std::string& path, const LatentDensityModel& model,
                      const json& metadata) {
    json j;
    j["grid"] = grid_to_json(model.basis().grid());
    j["basis_kind"] = model.basis().kind() == BasisKind::normalized_indicator
                          ? "normalized_indicator"
                          : "explicit";
    if (model.basis().kind() == BasisKind::explicit_orthonormal) {
        const auto& funcs = model.basis().functions();
        std::vector<double> flat(funcs.size());
        for (Eigen::Index r = 0; r < funcs.rows(); ++r)
            for (Eigen::Index c = 0; c < funcs.cols(); ++c)
                flat[static_cast<std::size_t>(r) * funcs.cols() + c] = funcs(r, c);
        j["basis_functions"] = flat;
        j["basis_size"] = static_cast<int>(funcs.cols());
    }
    j["nu"] = std::vector<double>(model.nu().data(),
                                  model.nu().data() + model.nu().size());
    const auto& sigma = model.sigma();
    std::vector<double> flat(sigma.size());
    for (Eigen::Index r = 0; r < sigma.rows(); ++r)
        for (Eigen::Index c = 0; c < sigma.cols(); ++c)
            flat[static_cast<std::size_t>(r) * sigma.cols() + c] = sigma(r, c);
    j["sigma"] = flat;
    j["metadata"] = metadata;

    std::ofstream out = open_output(path);
    out << j.dump(2) << "\n";
}

ModelFile read_model_json(const std::string& path) {
    std::ifstream in = open_input(path);
    json j = [&] {
        try {
            return json::parse(in);
        } catch (const json::exception& err) {
            throw ParseError("bad model file '" + path + "': " + err.what());
        }
    }();
    try {
        Grid grid = grid_from_json(j.at("grid"));
        std::string kind = j.at("basis_kind").get<std::string>();
        std::vector<double> nu_raw = j.at("nu").get<std::vector<double>>();
        std::vector<double> sigma_raw = j.at("sigma").get<std::vector<double>>();

        Basis basis = [&] {
            if (kind == "normalized_indicator") return make_basis(grid);
            int n = j.at("basis_size").get<int>();
            std::vector<double> funcs_raw =
                j.at("basis_functions").get<std::vector<double>>();
            Eigen::MatrixXd funcs(grid.n_cells(), n);
            for (int r = 0; r < grid.n_cells(); ++r)
                for (int c = 0; c < n; ++c)
                    funcs(r, c) = funcs_raw[static_cast<std::size_t>(r) * n + c];
            return Basis::explicit_orthonormal(grid, std::move(funcs));
        }();

        const int n = basis.size();
        if (static_cast<int>(nu_raw.size()) != n ||
            static_cast<int>(sigma_raw.size()) != n * n)
            throw ParseError("model file '" + path + "': parameter sizes do not match basis");
        Eigen::VectorXd nu = Eigen::Map<Eigen::VectorXd>(nu_raw.data(), n);
        Eigen::MatrixXd sigma(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                sigma(r, c) = sigma_raw[static_cast<std::size_t>(r) * n + c];

        ModelFile file{LatentDensityModel(std::move(basis), std::move(nu),
                                          std::move(sigma))};
        const json& meta = j.at("metadata");
        file.iterations = meta.value("iterations", 0);
        file.converged = meta.value("converged", false);
        file.final_nu_change = meta.value("final_nu_change", 0.0);
        file.final_sigma_change = meta.value("final_sigma_change", 0.0);
        return file;
    } catch (const json::exception& err) {
        throw ParseError("bad model file '" + path + "': " + err.what());
    }
}

void write_pca_exports(const std::string& dir, const PCARepresentation& pca,
                       const std::vector<std::string>& group_ids) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const Grid& grid = pca.mean.grid();

    write_grid_function_csv((fs::path(dir) / "pca_mean.csv").string(),
                            pca.mean.function());

    int k_exported = pca.scores.size() > 0 ? static_cast<int>(pca.scores.cols())
                                           : static_cast<int>(pca.eigenfunctions.size());
    k_exported = std::min<int>(k_exported, static_cast<int>(pca.eigenfunctions.size()));

    {
        std::ofstream out =
            open_output((fs::path(dir) / "pca_eigenfunctions.csv").string());
        out << "cell_midpoint";
        for (int k = 0; k < k_exported; ++k) out << ",phi_" << (k + 1);
        out << "\n";
        for (int c = 0; c < grid.n_cells(); ++c) {
            out << format_double(grid.midpoint(c));
            for (int k = 0; k < k_exported; ++k)
                out << "," << format_double(pca.eigenfunctions[k].values()[c]);
            out << "\n";
        }
    }
    {
        std::ofstream out = open_output((fs::path(dir) / "eigenvalues.csv").string());
        out << "component,eigenvalue,cumulative_variance_fraction\n";
        for (Eigen::Index k = 0; k < pca.eigenvalues.size(); ++k)
            out << (k + 1) << "," << format_double(pca.eigenvalues[k]) << ","
                << format_double(pca.variance_explained[k]) << "\n";
    }
    {
        std::ofstream out = open_output((fs::path(dir) / "scores.csv").string());
        out << "group_id";
        for (int k = 0; k < pca.scores.cols(); ++k) out << ",z_" << (k + 1);
        out << "\n";
        for (int i = 0; i < pca.scores.rows(); ++i) {
            out << (i < static_cast<int>(group_ids.size()) ? group_ids[i]
                                                           : std::to_string(i + 1));
            for (int k = 0; k < pca.scores.cols(); ++k)
                out << "," << format_double(pca.scores(i, k));
            out << "\n";
        }
    }
}

void write_densities_csv(const std::string& path,
                         const std::vector<std::string>& group_ids,
                         const std::vector<Density>& densities) {
    std::ofstream out = open_output(path);
    out << "group_id,cell_midpoint,density\n";
    for (std::size_t i = 0; i < densities.size(); ++i) {
        const Grid& grid = densities[i].grid();
        const std::string& id =
            i < group_ids.size() ? group_ids[i] : std::to_string(i + 1);
        for (int k = 0; k < grid.n_cells(); ++k)
            out << id << "," << format_double(grid.midpoint(k)) << ","
                << format_double(densities[i].values()[k]) << "\n";
    }
}

void write_trace_csv(const std::string& path, const McemTrace& trace) {
    std::ofstream out = open_output(path);
    out << "h,nu_change,sigma_change_frobenius,n_prime,draws,mean_ess\n";
    for (const auto& row : trace)
        out << row.iteration << "," << format_double(row.nu_change) << ","
            << format_double(row.sigma_change) << "," << row.n_prime << ","
            << row.draws << "," << format_double(row.mean_ess) << "\n";
}

void write_study_csv(const std::string& path, const std::vector<StudyRow>& rows) {
    std::ofstream out = open_output(path);
    out << "replicate,m_per_group,method,mean_distance,cov_distance,flag\n";
    for (const auto& row : rows)
        out << row.replicate << "," << row.m_per_group << "," << row.method << ","
            << format_double(row.mean_distance) << ","
            << format_double(row.cov_distance) << "," << row.flag << "\n";
}

void write_study_summary_json(const std::string& path,
                              const std::vector<StudySummaryRow>& summary) {
    json j = json::array();
    for (const auto& s : summary) {
        j.push_back(json{
            {"m_per_group", s.m_per_group},
            {"method", s.method},
            {"n_estimates", s.n_ok},
            {"n_flagged", s.n_flagged},
            {"mean_distance", {{"mean", s.mean_distance_mean}, {"sd", s.mean_distance_sd}}},
            {"cov_distance", {{"mean", s.cov_distance_mean}, {"sd", s.cov_distance_sd}}},
        });
    }
    std::ofstream out = open_output(path);
    out << j.dump(2) << "\n";
}

void write_compositional_exports(const std::string& dir,
                                 const CompositionalFit& fit,
                                 const std::vector<std::string>& group_ids,
                                 const std::vector<std::string>& categories) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto category_label = [&](int k) {
        return k < static_cast<int>(categories.size()) ? categories[k]
                                                       : std::to_string(k + 1);
    };

    {
        std::ofstream out =
            open_output((fs::path(dir) / "composition_mean.csv").string());
        out << "category,probability\n";
        for (int k = 0; k < fit.mean.n_categories(); ++k)
            out << category_label(k) << "," << format_double(fit.mean.probs()[k])
                << "\n";
    }
    {
        std::ofstream out =
            open_output((fs::path(dir) / "composition_components.csv").string());
        out << "category";
        for (std::size_t k = 0; k < fit.directions.size(); ++k)
            out << ",direction_" << (k + 1);
        out << "\n";
        int d = fit.mean.n_categories();
        for (int c = 0; c < d; ++c) {
            out << category_label(c);
            for (const auto& direction : fit.directions)
                out << "," << format_double(direction.probs()[c]);
            out << "\n";
        }
    }
    {
        std::ofstream out = open_output((fs::path(dir) / "eigenvalues.csv").string());
        out << "component,eigenvalue,cumulative_variance_fraction\n";
        for (Eigen::Index k = 0; k < fit.pca.eigenvalues.size(); ++k)
            out << (k + 1) << "," << format_double(fit.pca.eigenvalues[k]) << ","
                << format_double(fit.pca.variance_explained[k]) << "\n";
    }
    {
        std::ofstream out = open_output((fs::path(dir) / "scores.csv").string());
        out << "group_id";
        for (int k = 0; k < fit.pca.scores.cols(); ++k) out << ",z_" << (k + 1);
        out << "\n";
        for (int i = 0; i < fit.pca.scores.rows(); ++i) {
            out << (i < static_cast<int>(group_ids.size()) ? group_ids[i]
                                                           : std::to_string(i + 1));
            for (int k = 0; k < fit.pca.scores.cols(); ++k)
                out << "," << format_double(fit.pca.scores(i, k));
            out << "\n";
        }
    }
    {
        std::ofstream out =
            open_output((fs::path(dir) / "predicted_compositions.csv").string());
        out << "group_id,category,probability\n";
        for (std::size_t i = 0; i < fit.predicted.size(); ++i) {
            const std::string& id = i < group_ids.size() ? group_ids[i]
                                                         : std::to_string(i + 1);
            for (int k = 0; k < fit.predicted[i].n_categories(); ++k)
                out << id << "," << category_label(k) << ","
                    << format_double(fit.predicted[i].probs()[k]) << "\n";
        }
    }
}

}  // namespace latdens::io
