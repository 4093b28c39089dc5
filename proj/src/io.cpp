#include "hetfx/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "hetfx/dataset.hpp"
#include "hetfx/errors.hpp"

namespace hetfx {

namespace {

using nlohmann::json;

std::string fmt_full(double v) {  // round-trip exact decimal form
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string fmt_fixed(double v, int places) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.*f", places, v);
    return buf;
}

const char* branch_name(TestBranch b) {
    switch (b) {
        case TestBranch::auto_detect: return "auto";
        case TestBranch::discrete: return "discrete";
        case TestBranch::continuous: return "continuous";
    }
    return "auto";
}

TestBranch parse_branch(const std::string& s) {
    if (s == "auto") return TestBranch::auto_detect;
    if (s == "discrete") return TestBranch::discrete;
    if (s == "continuous") return TestBranch::continuous;
    fail(ErrorCode::ParseError, "unknown test branch '" + s + "'");
}

const char* rule_name(KernelSpec::Rule r) {
    return r == KernelSpec::Rule::fixed ? "fixed" : "silverman";
}

KernelSpec::Rule parse_rule(const std::string& s) {
    if (s == "silverman") return KernelSpec::Rule::silverman;
    if (s == "fixed") return KernelSpec::Rule::fixed;
    fail(ErrorCode::ParseError, "unknown bandwidth rule '" + s + "'");
}

const char* multiplier_name(MultiplierSpec::Dist d) {
    switch (d) {
        case MultiplierSpec::Dist::standard_normal: return "standard_normal";
        case MultiplierSpec::Dist::rademacher: return "rademacher";
        case MultiplierSpec::Dist::mammen: return "mammen";
    }
    return "standard_normal";
}

MultiplierSpec::Dist parse_multiplier(const std::string& s) {
    if (s == "standard_normal") return MultiplierSpec::Dist::standard_normal;
    if (s == "rademacher") return MultiplierSpec::Dist::rademacher;
    if (s == "mammen") return MultiplierSpec::Dist::mammen;
    fail(ErrorCode::ParseError, "unknown multiplier distribution '" + s + "'");
}

const char* phi_sign_name(PhiSign p) {
    return p == PhiSign::paper_estimator ? "paper_estimator" : "population";
}

PhiSign parse_phi_sign(const std::string& s) {
    if (s == "population") return PhiSign::population;
    if (s == "paper_estimator") return PhiSign::paper_estimator;
    fail(ErrorCode::ParseError, "unknown phi-sign mode '" + s + "'");
}

const char* reject_rule_name(RejectRule r) {
    return r == RejectRule::critical_value ? "critical_value" : "p_value";
}

RejectRule parse_reject_rule(const std::string& s) {
    if (s == "p_value") return RejectRule::p_value;
    if (s == "critical_value") return RejectRule::critical_value;
    fail(ErrorCode::ParseError, "unknown rejection rule '" + s + "'");
}

json config_to_json(const RunConfig& c) {
    return json{
        {"branch", branch_name(c.branch)},
        {"grid_w", c.grid_w},
        {"grid_x", c.grid_x},
        {"kernel",
         {{"rule", rule_name(c.kernel.bandwidth_rule)},
          {"fixed_bandwidth", c.kernel.fixed_bandwidth},
          {"bandwidth_scale", c.kernel.bandwidth_scale},
          {"exponent", c.kernel.exponent}}},
        {"q_bandwidth", c.q_bandwidth},
        {"multiplier",
         {{"distribution", multiplier_name(c.multiplier.distribution)},
          {"reps", c.multiplier.reps},
          {"seed", c.multiplier.seed}}},
        {"alphas", c.alphas},
        {"relevance_tol", c.relevance_tol},
        {"q_floor", c.q_floor},
        {"phi_sign", phi_sign_name(c.phi_sign)},
        {"w_support_quantile", c.w_support_quantile},
        {"stage1_exponent", c.stage1_exponent},
        {"kappa_truncate_at_zero", c.kappa_truncate_at_zero},
        {"reject_rule", reject_rule_name(c.reject_rule)},
        {"threads", c.threads},
    };
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    c.branch = parse_branch(j.at("branch").get<std::string>());
    c.grid_w = j.at("grid_w").get<std::uint32_t>();
    c.grid_x = j.at("grid_x").get<std::uint32_t>();
    const json& k = j.at("kernel");
    c.kernel.bandwidth_rule = parse_rule(k.at("rule").get<std::string>());
    c.kernel.fixed_bandwidth = k.at("fixed_bandwidth").get<double>();
    c.kernel.bandwidth_scale = k.at("bandwidth_scale").get<double>();
    c.kernel.exponent = k.at("exponent").get<double>();
    c.q_bandwidth = j.at("q_bandwidth").get<double>();
    const json& m = j.at("multiplier");
    c.multiplier.distribution = parse_multiplier(m.at("distribution").get<std::string>());
    c.multiplier.reps = m.at("reps").get<std::uint32_t>();
    c.multiplier.seed = m.at("seed").get<std::uint64_t>();
    c.alphas = j.at("alphas").get<std::vector<double>>();
    c.relevance_tol = j.at("relevance_tol").get<double>();
    c.q_floor = j.at("q_floor").get<double>();
    c.phi_sign = parse_phi_sign(j.at("phi_sign").get<std::string>());
    c.w_support_quantile = j.at("w_support_quantile").get<double>();
    c.stage1_exponent = j.at("stage1_exponent").get<double>();
    c.kappa_truncate_at_zero = j.at("kappa_truncate_at_zero").get<bool>();
    c.reject_rule = parse_reject_rule(j.at("reject_rule").get<std::string>());
    c.threads = j.at("threads").get<int>();
    return c;
}

// --- CSV lexer ------------------------------------------------------------

// Splits RFC-4180-style text into records of raw field strings. Quoted
// fields may contain commas, newlines and doubled quotes.
std::vector<std::vector<std::string>> lex_csv(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
            case '"':
                in_quotes = true;
                field_started = true;
                break;
            case ',': end_field(); break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
                end_record();
                break;
            case '\n': end_record(); break;
            default:
                field.push_back(ch);
                field_started = true;
                break;
        }
    }
    if (in_quotes)
        fail(ErrorCode::ParseError, "unterminated quoted field at end of file");
    if (field_started || !field.empty() || !record.empty()) end_record();
    return records;
}

double parse_cell(const std::string& raw, std::size_t data_row, const std::string& column) {
    std::string_view sv(raw);
    while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t')) sv.remove_prefix(1);
    while (!sv.empty() && (sv.back() == ' ' || sv.back() == '\t')) sv.remove_suffix(1);
    double value = 0.0;
    const char* first = sv.data();
    const char* last = sv.data() + sv.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (sv.empty() || ec != std::errc{} || ptr != last)
        fail(ErrorCode::ParseError, "row " + std::to_string(data_row) + ", column '" +
                                        column + "': cannot parse '" + raw +
                                        "' as a number");
    return value;
}

}  // namespace

OutputFormat parse_output_format(const std::string& name) {
    if (name == "json") return OutputFormat::json;
    if (name == "csv") return OutputFormat::csv;
    if (name == "text") return OutputFormat::text;
    fail(ErrorCode::ParseError, "unknown output format '" + name + "'");
}

Dataset read_csv(const std::string& path, const ColumnMap& map) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) fail(ErrorCode::IoError, "read failure on '" + path + "'");

    const auto records = lex_csv(buffer.str());
    if (records.empty()) fail(ErrorCode::EmptyInput, "'" + path + "' has no header row");
    const auto& header = records.front();

    std::vector<std::string> wanted = {map.outcome, map.treatment, map.instrument};
    for (const auto& [name, kind] : map.covariates) {
        (void)kind;
        wanted.push_back(name);
    }
    if (wanted.size() < 4)
        fail(ErrorCode::MissingColumn, "at least one covariate column is required");
    {
        std::set<std::string> distinct(wanted.begin(), wanted.end());
        if (distinct.size() != wanted.size())
            fail(ErrorCode::ParseError, "column names must be distinct");
    }

    std::vector<std::size_t> index(wanted.size());
    for (std::size_t c = 0; c < wanted.size(); ++c) {
        const auto it = std::find(header.begin(), header.end(), wanted[c]);
        if (it == header.end())
            fail(ErrorCode::MissingColumn, "column '" + wanted[c] + "' not in header");
        index[c] = static_cast<std::size_t>(it - header.begin());
    }

    std::vector<CovariateKind> kinds;
    kinds.reserve(map.covariates.size());
    for (const auto& [name, kind] : map.covariates) {
        (void)name;
        kinds.push_back(kind);
    }

    std::vector<std::vector<double>> raw;
    raw.reserve(records.size() - 1);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        std::vector<double> row(wanted.size());
        for (std::size_t c = 0; c < wanted.size(); ++c) {
            if (index[c] >= rec.size())
                fail(ErrorCode::ParseError,
                     "row " + std::to_string(r) + " has " + std::to_string(rec.size()) +
                         " fields; column '" + wanted[c] + "' is missing");
            row[c] = parse_cell(rec[index[c]], r, wanted[c]);
        }
        raw.push_back(std::move(row));
    }
    return validate_dataset(raw, kinds);
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
    std::ostringstream out;
    out << "Y,D,Z";
    if (data.x_dim() == 1) {
        out << ",X";
    } else {
        for (std::size_t k = 0; k < data.x_dim(); ++k) out << ",X" << (k + 1);
    }
    out << "\n";
    for (std::size_t i = 0; i < data.n(); ++i) {
        out << fmt_full(data.y[i]) << ',' << int(data.d[i]) << ',' << int(data.z[i]);
        for (std::size_t k = 0; k < data.x_dim(); ++k) out << ',' << fmt_full(data.x[k][i]);
        out << "\n";
    }
    write_output(path, out.str());
}

std::string serialize_report(const TestReport& report, OutputFormat format) {
    if (format == OutputFormat::json) {
        json cvs = json::array();
        for (const auto& [alpha, value] : report.critical_values)
            cvs.push_back(json{{"alpha", alpha}, {"value", value}});
        const json j{
            {"kind", "test_report"},
            {"statistic", report.statistic},
            {"p_value", report.p_value},
            {"critical_values", cvs},
            {"n", report.n},
            {"bootstrap_reps", report.bootstrap_reps},
            {"grid_w", report.grid_sizes.first},
            {"grid_x", report.grid_sizes.second},
            {"seed", report.seed},
            {"branch", branch_name(report.branch_used)},
            {"config", config_to_json(report.config_echo)},
        };
        return j.dump(2) + "\n";
    }
    if (format == OutputFormat::csv) {
        std::ostringstream head, row;
        head << "statistic,p_value,n,bootstrap_reps,grid_w,grid_x,seed,branch";
        row << fmt_full(report.statistic) << ',' << fmt_full(report.p_value) << ','
            << report.n << ',' << report.bootstrap_reps << ',' << report.grid_sizes.first
            << ',' << report.grid_sizes.second << ',' << report.seed << ','
            << branch_name(report.branch_used);
        for (const auto& [alpha, value] : report.critical_values) {
            head << ",cv_alpha_" << fmt_short(alpha);
            row << ',' << fmt_full(value);
        }
        return head.str() + "\n" + row.str() + "\n";
    }
    std::ostringstream out;
    out << "heterogeneous-effect test (" << branch_name(report.branch_used) << " branch)\n";
    out << "  n:              " << report.n << "\n";
    out << "  statistic:      " << fmt_fixed(report.statistic, 6) << "\n";
    out << "  p-value:        " << fmt_fixed(report.p_value, 6) << "\n";
    out << "  critical values:\n";
    for (const auto& [alpha, value] : report.critical_values)
        out << "    alpha " << fmt_fixed(alpha, 3) << ":    " << fmt_fixed(value, 6) << "\n";
    out << "  bootstrap reps: " << report.bootstrap_reps << "\n";
    out << "  multiplier:     " << multiplier_name(report.config_echo.multiplier.distribution)
        << "\n";
    out << "  grid:           " << report.grid_sizes.first << " x "
        << report.grid_sizes.second << "\n";
    out << "  seed:           " << report.seed << "\n";
    return out.str();
}

TestReport parse_report_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::ParseError, std::string("bad report JSON: ") + e.what());
    }
    try {
        TestReport r;
        r.statistic = j.at("statistic").get<double>();
        r.p_value = j.at("p_value").get<double>();
        for (const auto& item : j.at("critical_values"))
            r.critical_values[item.at("alpha").get<double>()] =
                item.at("value").get<double>();
        r.n = j.at("n").get<std::size_t>();
        r.bootstrap_reps = j.at("bootstrap_reps").get<std::uint32_t>();
        r.grid_sizes = {j.at("grid_w").get<std::size_t>(), j.at("grid_x").get<std::size_t>()};
        r.seed = j.at("seed").get<std::uint64_t>();
        r.branch_used = parse_branch(j.at("branch").get<std::string>());
        r.config_echo = config_from_json(j.at("config"));
        return r;
    } catch (const json::exception& e) {
        fail(ErrorCode::ParseError, std::string("report JSON missing fields: ") + e.what());
    }
}

std::string serialize_table(const RejectionTable& table, OutputFormat format) {
    if (format == OutputFormat::json) {
        json rows = json::array();
        for (const auto& row : table.rows)
            rows.push_back(json{
                {"dgp", row.spec.id},
                {"n", row.spec.n},
                {"rho", row.spec.rho},
                {"gamma", row.spec.gamma},
                {"pz", row.spec.pz},
                {"seed", row.spec.seed},
                {"alpha", row.alpha},
                {"rate", row.rate},
                {"reps_used", row.reps},
                {"errors", row.errors},
            });
        const json j{
            {"kind", "rejection_table"},
            {"reps", table.reps},
            {"bootstrap_reps", table.bootstrap_reps},
            {"rows", rows},
        };
        return j.dump(2) + "\n";
    }

    // Pivot: one row per (n, pz) sample point and one column per
    // (alpha, rho) pair; design id and gamma become extra row keys when
    // the table mixes several of them.
    struct RowKey {
        int dgp;
        double gamma;
        std::size_t n;
        double pz;
        auto operator<=>(const RowKey&) const = default;
    };
    struct ColKey {
        double alpha;
        double rho;
        auto operator<=>(const ColKey&) const = default;
    };
    std::set<int> dgps;
    std::set<double> gammas;
    std::set<RowKey> row_keys;
    std::set<ColKey> col_keys;
    std::map<std::pair<RowKey, ColKey>, const RejectionRow*> cells;
    for (const auto& row : table.rows) {
        const RowKey rk{row.spec.id, row.spec.gamma, row.spec.n, row.spec.pz};
        const ColKey ck{row.alpha, row.spec.rho};
        dgps.insert(row.spec.id);
        gammas.insert(row.spec.gamma);
        row_keys.insert(rk);
        col_keys.insert(ck);
        cells[{rk, ck}] = &row;
    }
    const bool show_dgp = dgps.size() > 1;
    const bool show_gamma = gammas.size() > 1;

    std::vector<std::vector<std::string>> grid;
    {
        std::vector<std::string> head;
        if (show_dgp) head.push_back("dgp");
        if (show_gamma) head.push_back("gamma");
        head.push_back("n");
        head.push_back("pz");
        for (const auto& ck : col_keys)
            head.push_back("alpha" + std::string(fmt_short(ck.alpha)) + "_rho" +
                           fmt_short(ck.rho));
        grid.push_back(std::move(head));
    }
    for (const auto& rk : row_keys) {
        std::vector<std::string> line;
        if (show_dgp) line.push_back(std::to_string(rk.dgp));
        if (show_gamma) line.push_back(fmt_short(rk.gamma));
        line.push_back(std::to_string(rk.n));
        line.push_back(fmt_short(rk.pz));
        for (const auto& ck : col_keys) {
            const auto it = cells.find({rk, ck});
            line.push_back(it == cells.end() ? "" : fmt_fixed(it->second->rate, 4));
        }
        grid.push_back(std::move(line));
    }

    if (format == OutputFormat::csv) {
        std::ostringstream out;
        for (const auto& line : grid) {
            for (std::size_t c = 0; c < line.size(); ++c)
                out << (c ? "," : "") << line[c];
            out << "\n";
        }
        return out.str();
    }

    std::uint32_t errors = 0;
    for (const auto& row : table.rows) errors = std::max(errors, row.errors);
    std::ostringstream out;
    out << "rejection rates (" << table.reps << " replicates, " << table.bootstrap_reps
        << " bootstrap reps";
    if (errors > 0) out << ", " << errors << " replicates excluded by errors";
    out << ")\n";
    std::vector<std::size_t> width(grid.front().size(), 0);
    for (const auto& line : grid)
        for (std::size_t c = 0; c < line.size(); ++c)
            width[c] = std::max(width[c], line[c].size());
    for (const auto& line : grid) {
        out << " ";
        for (std::size_t c = 0; c < line.size(); ++c) {
            out << " " << line[c];
            for (std::size_t pad = line[c].size(); pad < width[c]; ++pad) out << ' ';
        }
        out << "\n";
    }
    return out.str();
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out) fail(ErrorCode::IoError, "write failure on '" + path + "'");
}

}  // namespace hetfx
