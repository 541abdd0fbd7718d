#include "scr/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scr/constants.hpp"
#include "scr/errors.hpp"

namespace scr::io {

namespace {

using json = nlohmann::ordered_json;

// Line numbers of keys inside the objects that sit at a given nesting depth,
// in document order. Used only to point error messages at the right line.
class KeyLines {
public:
    KeyLines(std::string_view text, int depth) {
        int level = 0;
        int line = 1;
        bool in_string = false;
        bool escaped = false;
        std::string token;
        int token_line = 0;
        bool have_token = false;
        for (char ch : text) {
            if (in_string) {
                if (escaped) {
                    escaped = false;
                    token.push_back(ch);
                } else if (ch == '\\') {
                    escaped = true;
                } else if (ch == '"') {
                    in_string = false;
                    have_token = true;
                } else {
                    token.push_back(ch);
                }
                if (ch == '\n') {
                    ++line;
                }
                continue;
            }
            switch (ch) {
            case '\n':
                ++line;
                break;
            case '"':
                in_string = true;
                token.clear();
                token_line = line;
                break;
            case '{':
            case '[':
                ++level;
                if (ch == '{' && level == depth) {
                    objects_.push_back({line, {}});
                }
                have_token = false;
                break;
            case '}':
            case ']':
                --level;
                have_token = false;
                break;
            case ':':
                if (have_token && level == depth && !objects_.empty()) {
                    objects_.back().keys.emplace(token, token_line);
                }
                have_token = false;
                break;
            case ',':
                have_token = false;
                break;
            default:
                break;
            }
        }
    }

    int object_line(std::size_t index) const {
        return index < objects_.size() ? objects_[index].line : 0;
    }

    int key_line(std::size_t index, const std::string& key) const {
        if (index >= objects_.size()) {
            return 0;
        }
        const auto it = objects_[index].keys.find(key);
        return it == objects_[index].keys.end() ? objects_[index].line : it->second;
    }

private:
    struct Object {
        int line;
        std::map<std::string, int> keys;
    };
    std::vector<Object> objects_;
};

std::string where(std::string_view source, int line) {
    std::ostringstream out;
    out << source;
    if (line > 0) {
        out << ":" << line;
    }
    return out.str();
}

json parse_json(std::string_view text, std::string_view source) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string(source) + ": malformed JSON: " + e.what());
    }
}

// Locates the array of records and the depth of its element objects.
std::pair<const json*, int> record_array(const json& doc, std::string_view key,
                                         std::string_view source) {
    if (doc.is_array()) {
        return {&doc, 2};
    }
    if (doc.is_object()) {
        for (const auto& [k, v] : doc.items()) {
            if (k != key) {
                throw ParseError(where(source, 1) + ": unknown top-level field '" + k + "'");
            }
        }
        const auto it = doc.find(std::string(key));
        if (it == doc.end()) {
            throw ParseError(where(source, 1) + ": missing top-level field '" + std::string(key) +
                             "'");
        }
        if (!it->is_array()) {
            throw ParseError(where(source, 1) + ": field '" + std::string(key) +
                             "' must be an array");
        }
        return {&*it, 3};
    }
    throw ParseError(where(source, 1) + ": expected an array or an object");
}

class RecordReader {
public:
    RecordReader(const json& record, std::size_t index, const KeyLines& lines,
                 std::string_view source, const std::set<std::string>& allowed)
        : record_(record), index_(index), lines_(lines), source_(source) {
        if (!record.is_object()) {
            throw ParseError(where(source_, lines_.object_line(index)) + ": record " +
                             std::to_string(index) + " must be an object");
        }
        for (const auto& [k, v] : record.items()) {
            if (!allowed.contains(k)) {
                throw ParseError(where(source_, lines_.key_line(index, k)) + ": unknown field '" +
                                 k + "'");
            }
        }
    }

    bool has(const std::string& key) const { return record_.contains(key); }

    int line(const std::string& key) const { return lines_.key_line(index_, key); }

    double number(const std::string& key) const {
        const auto it = record_.find(key);
        if (it == record_.end()) {
            throw ParseError(where(source_, lines_.object_line(index_)) +
                             ": missing required field '" + key + "'");
        }
        if (!it->is_number()) {
            throw ParseError(where(source_, line(key)) + ": field '" + key +
                             "' must be a number");
        }
        return it->get<double>();
    }

    double number_or(const std::string& key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }

    std::string text(const std::string& key) const {
        const auto it = record_.find(key);
        if (it == record_.end()) {
            throw ParseError(where(source_, lines_.object_line(index_)) +
                             ": missing required field '" + key + "'");
        }
        if (!it->is_string()) {
            throw ParseError(where(source_, line(key)) + ": field '" + key +
                             "' must be a string");
        }
        return it->get<std::string>();
    }

    std::string_view source() const { return source_; }

private:
    const json& record_;
    std::size_t index_;
    const KeyLines& lines_;
    std::string_view source_;
};

const std::set<std::string> kDesignFields = {
    "name",    "length_mm", "width_um", "c_a_fF", "c_b_fF", "c_x_fF",
    "c_ca_fF", "c_cb_fF",   "l_nH",     "l_sq_pH", "l_t_nH",
};

// Maps a CircuitDesign field named in a validation message onto its file key.
const std::map<std::string, std::string> kFieldKeys = {
    {"length", "length_mm"}, {"width", "width_um"}, {"c_a", "c_a_fF"},
    {"c_b", "c_b_fF"},       {"c_x", "c_x_fF"},     {"c_ca", "c_ca_fF"},
    {"c_cb", "c_cb_fF"},     {"inductance", "l_nH"}, {"tail_inductance", "l_t_nH"},
};

bool parse_double(std::string_view text, double& out) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
        text.remove_prefix(1);
    }
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return std::string(s);
}

std::string_view mode_key(ModeLabel label) { return to_string(label); }

json number_or_null(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

}  // namespace

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ValidationError("cannot write '" + path.string() + "'");
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
        throw ValidationError("failed writing '" + path.string() + "'");
    }
}

std::string format_number(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

// ---- designs -----------------------------------------------------------------

std::vector<CircuitDesign> parse_designs(std::string_view text, std::string_view source) {
    const json doc = parse_json(text, source);
    const auto [records, depth] = record_array(doc, "designs", source);
    const KeyLines lines(text, depth);

    std::vector<CircuitDesign> designs;
    std::set<std::string> names;
    for (std::size_t i = 0; i < records->size(); ++i) {
        const RecordReader r((*records)[i], i, lines, source, kDesignFields);
        CircuitDesign d;
        d.name = r.text("name");
        if (d.name.empty()) {
            throw ValidationError(where(source, r.line("name")) + ": field 'name' is empty");
        }
        if (!names.insert(d.name).second) {
            throw ValidationError(where(source, r.line("name")) + ": duplicate design name '" +
                                  d.name + "'");
        }
        d.length = r.number("length_mm") * units::mm;
        d.width = r.number("width_um") * units::um;
        d.c_a = r.number("c_a_fF") * units::fF;
        d.c_b = r.number("c_b_fF") * units::fF;
        d.c_x = r.number_or("c_x_fF", 0.0) * units::fF;
        d.c_ca = r.number_or("c_ca_fF", 0.0) * units::fF;
        d.c_cb = r.number_or("c_cb_fF", 0.0) * units::fF;
        d.tail_inductance = r.number_or("l_t_nH", 0.0) * units::nH;

        const bool direct = r.has("l_nH");
        const bool film = r.has("l_sq_pH");
        if (direct == film) {
            throw ParseError(where(source, lines.object_line(i)) + ": design '" + d.name +
                             "' needs exactly one of 'l_nH' or 'l_sq_pH'");
        }
        if (direct) {
            d.inductance = r.number("l_nH") * units::nH;
        } else {
            const double l_sq = r.number("l_sq_pH") * units::pH;
            if (!(l_sq > 0.0)) {
                throw ValidationError(where(source, r.line("l_sq_pH")) +
                                      ": field 'l_sq_pH' must be positive");
            }
            if (d.length > 0.0 && d.width > 0.0) {
                d.inductance = wire_inductance(l_sq, d.length, d.width);
            }
        }

        try {
            d.validate();
        } catch (const ValidationError& e) {
            // Re-anchor the message on the offending key's line.
            std::string msg = e.what();
            int line = lines.object_line(i);
            for (const auto& [field, key] : kFieldKeys) {
                if (msg.find("'" + field + "'") != std::string::npos) {
                    line = r.line(key);
                    msg.replace(msg.find("'" + field + "'"), field.size() + 2, "'" + key + "'");
                    break;
                }
            }
            throw ValidationError(where(source, line) + ": design '" + d.name + "': " + msg);
        }
        designs.push_back(std::move(d));
    }
    return designs;
}

std::vector<CircuitDesign> load_designs(const std::filesystem::path& path) {
    return parse_designs(read_file(path), path.string());
}

std::string designs_to_json(const std::vector<CircuitDesign>& designs) {
    json list = json::array();
    for (const auto& d : designs) {
        json o;
        o["name"] = d.name;
        o["length_mm"] = d.length / units::mm;
        o["width_um"] = d.width / units::um;
        o["c_a_fF"] = d.c_a / units::fF;
        o["c_b_fF"] = d.c_b / units::fF;
        o["c_x_fF"] = d.c_x / units::fF;
        o["c_ca_fF"] = d.c_ca / units::fF;
        o["c_cb_fF"] = d.c_cb / units::fF;
        o["l_nH"] = d.inductance / units::nH;
        o["l_t_nH"] = d.tail_inductance / units::nH;
        list.push_back(std::move(o));
    }
    json doc;
    doc["designs"] = std::move(list);
    return dump(doc);
}

// ---- traces ------------------------------------------------------------------

TraceFormat parse_trace_format(std::string_view text) {
    if (text == "auto") {
        return TraceFormat::automatic;
    }
    if (text == "re-im" || text == "reim") {
        return TraceFormat::re_im;
    }
    if (text == "db-phase" || text == "dbphase") {
        return TraceFormat::db_phase;
    }
    throw ParseError("unknown trace format '" + std::string(text) +
                     "' (expected auto, re-im or db-phase)");
}

S21Trace parse_trace(std::string_view text, TraceFormat format, std::string_view source) {
    S21Trace trace;
    bool have_header = false;
    TraceFormat detected = TraceFormat::automatic;
    int line_no = 0;
    std::size_t start = 0;

    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        const std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;

        const std::string content = trim(line);
        if (content.empty() || content.front() == '#') {
            if (end == text.size()) {
                break;
            }
            continue;
        }

        const auto fields = split(content, ',');
        if (!have_header) {
            std::vector<std::string> cols;
            for (auto f : fields) {
                cols.push_back(trim(f));
            }
            if (cols == std::vector<std::string>{"frequency_hz", "re", "im"}) {
                detected = TraceFormat::re_im;
            } else if (cols == std::vector<std::string>{"frequency_hz", "magnitude_db", "phase_rad"}) {
                detected = TraceFormat::db_phase;
            } else {
                throw ParseError(where(source, line_no) +
                                 ": header must be 'frequency_hz,re,im' or "
                                 "'frequency_hz,magnitude_db,phase_rad' (got '" + content + "')");
            }
            if (format != TraceFormat::automatic && format != detected) {
                throw ParseError(where(source, line_no) +
                                 ": header columns do not match the requested trace format");
            }
            have_header = true;
            continue;
        }

        if (fields.size() != 3) {
            throw ParseError(where(source, line_no) + ": expected 3 columns, found " +
                             std::to_string(fields.size()));
        }
        double v[3];
        for (std::size_t k = 0; k < 3; ++k) {
            if (!parse_double(fields[k], v[k])) {
                throw ParseError(where(source, line_no) + ": column " + std::to_string(k + 1) +
                                 " is not a number ('" + trim(fields[k]) + "')");
            }
        }
        if (!trace.frequencies.empty()) {
            if (v[0] == trace.frequencies.back()) {
                throw ValidationError(where(source, line_no) + ": duplicate frequency on row " +
                                      std::to_string(line_no));
            }
            if (v[0] < trace.frequencies.back()) {
                throw ValidationError(where(source, line_no) +
                                      ": frequency not increasing on row " +
                                      std::to_string(line_no));
            }
        }
        trace.frequencies.push_back(v[0]);
        if (detected == TraceFormat::re_im) {
            trace.values.emplace_back(v[1], v[2]);
        } else {
            trace.values.push_back(std::polar(std::pow(10.0, v[1] / 20.0), v[2]));
        }
        if (end == text.size()) {
            break;
        }
    }
    if (!have_header) {
        throw ParseError(std::string(source) + ": trace file has no header");
    }
    try {
        trace.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string(source) + ": " + e.what());
    }
    return trace;
}

S21Trace load_trace(const std::filesystem::path& path, TraceFormat format) {
    return parse_trace(read_file(path), format, path.string());
}

std::string trace_to_csv(const S21Trace& trace) {
    std::string out = "frequency_hz,re,im\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out += format_number(trace.frequencies[i]);
        out += ',';
        out += format_number(trace.values[i].real());
        out += ',';
        out += format_number(trace.values[i].imag());
        out += '\n';
    }
    return out;
}

// ---- references and lever arms -----------------------------------------------

ReferenceMap parse_references(std::string_view text, std::string_view source) {
    const json doc = parse_json(text, source);
    const auto [records, depth] = record_array(doc, "references", source);
    const KeyLines lines(text, depth);
    const std::set<std::string> allowed = {"name", "mode", "f_GHz", "f_Hz"};

    ReferenceMap refs;
    for (std::size_t i = 0; i < records->size(); ++i) {
        const RecordReader r((*records)[i], i, lines, source, allowed);
        const std::string name = r.text("name");
        ModeLabel label;
        try {
            label = parse_mode_label(r.text("mode"));
        } catch (const ParseError& e) {
            throw ParseError(where(source, r.line("mode")) + ": " + e.what());
        }
        if (r.has("f_GHz") == r.has("f_Hz")) {
            throw ParseError(where(source, lines.object_line(i)) +
                             ": reference needs exactly one of 'f_GHz' or 'f_Hz'");
        }
        const std::string key = r.has("f_GHz") ? "f_GHz" : "f_Hz";
        const double f = r.number(key) * (key == "f_GHz" ? units::GHz : 1.0);
        if (!(f > 0.0) || !std::isfinite(f)) {
            throw ValidationError(where(source, r.line(key)) + ": field '" + key +
                                  "' must be positive");
        }
        if (!refs.emplace(ReferenceKey{name, label}, f).second) {
            throw ValidationError(where(source, lines.object_line(i)) + ": duplicate reference for " +
                                  name + " " + std::string(to_string(label)));
        }
    }
    return refs;
}

ReferenceMap load_references(const std::filesystem::path& path) {
    return parse_references(read_file(path), path.string());
}

std::string references_to_json(const ReferenceMap& references) {
    json list = json::array();
    for (const auto& [key, f] : references) {
        json o;
        o["name"] = key.first;
        o["mode"] = std::string(mode_key(key.second));
        o["f_Hz"] = f;
        list.push_back(std::move(o));
    }
    json doc;
    doc["references"] = std::move(list);
    return dump(doc);
}

LeverArms parse_lever_arms(std::string_view text, std::string_view source) {
    const json doc = parse_json(text, source);
    const auto [records, depth] = record_array(doc, "electrons", source);
    const KeyLines lines(text, depth);
    const std::set<std::string> allowed = {"da_dx_per_um", "da_dy_per_um", "db_dx_per_um",
                                           "db_dy_per_um"};
    LeverArms arms;
    for (std::size_t i = 0; i < records->size(); ++i) {
        const RecordReader r((*records)[i], i, lines, source, allowed);
        PlateArms a;
        a.da_dx = r.number_or("da_dx_per_um", 0.0) / units::um;
        a.da_dy = r.number_or("da_dy_per_um", 0.0) / units::um;
        a.db_dx = r.number_or("db_dx_per_um", 0.0) / units::um;
        a.db_dy = r.number_or("db_dy_per_um", 0.0) / units::um;
        arms.electrons.push_back(a);
    }
    if (arms.size() == 0) {
        throw ValidationError(std::string(source) + ": lever-arm file lists no electrons");
    }
    return arms;
}

LeverArms load_lever_arms(const std::filesystem::path& path) {
    return parse_lever_arms(read_file(path), path.string());
}

// ---- output documents --------------------------------------------------------

std::string modes_to_csv(const std::vector<FamilyModes>& family) {
    std::string out = "name,mode,frequency_hz,impedance_ohm,q_a,q_b\n";
    for (const auto& m : family) {
        for (const Mode* mode : {&m.common, &m.differential}) {
            out += m.name + ',' + std::string(to_string(mode->label)) + ',' +
                   format_number(mode->frequency) + ',' +
                   (mode->impedance ? format_number(*mode->impedance) : std::string()) + ',' +
                   format_number(mode->eigenvector[0]) + ',' + format_number(mode->eigenvector[1]) +
                   '\n';
        }
    }
    return out;
}

std::string modes_to_json(const std::vector<FamilyModes>& family, double gamma) {
    json list = json::array();
    for (const auto& m : family) {
        for (const Mode* mode : {&m.common, &m.differential}) {
            json o;
            o["name"] = m.name;
            o["mode"] = std::string(to_string(mode->label));
            o["frequency_hz"] = mode->frequency;
            o["impedance_ohm"] = number_or_null(mode->impedance);
            o["eigenvector"] = {mode->eigenvector[0], mode->eigenvector[1]};
            list.push_back(std::move(o));
        }
    }
    json doc;
    doc["gamma"] = gamma;
    doc["modes"] = std::move(list);
    return dump(doc);
}

std::string report_to_json(const VerificationReport& report) {
    json rows = json::array();
    for (const auto& r : report.rows) {
        json o;
        o["name"] = r.name;
        o["mode"] = std::string(to_string(r.label));
        o["predicted_hz"] = r.predicted;
        o["reference_hz"] = number_or_null(r.reference);
        o["relative_error"] = number_or_null(r.relative_error);
        o["qc"] = number_or_null(r.qc);
        rows.push_back(std::move(o));
    }
    json splits = json::array();
    for (const auto& s : report.splittings) {
        json o;
        o["name"] = s.name;
        o["exact_hz"] = s.exact;
        o["approx_hz"] = s.approx;
        splits.push_back(std::move(o));
    }
    json doc;
    doc["gamma"] = report.gamma;
    doc["objective"] = report.objective;
    doc["multiple_minima"] = report.multiple_minima;
    doc["max_abs_error"] = report.max_abs_error;
    doc["rms_error"] = report.rms_error;
    doc["modes"] = std::move(rows);
    doc["splittings"] = std::move(splits);
    return dump(doc);
}

std::string report_to_csv(const VerificationReport& report) {
    std::string out = "name,mode,predicted_hz,reference_hz,relative_error,qc\n";
    const auto opt = [](const std::optional<double>& v) {
        return v ? format_number(*v) : std::string();
    };
    for (const auto& r : report.rows) {
        out += r.name + ',' + std::string(to_string(r.label)) + ',' + format_number(r.predicted) +
               ',' + opt(r.reference) + ',' + opt(r.relative_error) + ',' + opt(r.qc) + '\n';
    }
    return out;
}

std::string fit_to_json(const std::vector<std::pair<std::string, ResonanceFit>>& fits) {
    json list = json::array();
    for (const auto& [name, fit] : fits) {
        json o;
        o["trace"] = name;
        o["f0_hz"] = fit.params.f0;
        o["qi"] = fit.params.qi;
        o["qc"] = fit.params.qc;
        o["phi_rad"] = fit.params.phi;
        o["sigma_f0_hz"] = fit.uncertainty.f0;
        o["sigma_qi"] = fit.uncertainty.qi;
        o["sigma_qc"] = fit.uncertainty.qc;
        o["sigma_phi_rad"] = fit.uncertainty.phi;
        if (fit.delay != 0.0 || fit.delay_uncertainty != 0.0) {
            o["delay_s"] = fit.delay;
            o["sigma_delay_s"] = fit.delay_uncertainty;
        }
        o["residual_rms"] = fit.residual_rms;
        o["iterations"] = fit.iterations;
        list.push_back(std::move(o));
    }
    json doc;
    doc["fits"] = std::move(list);
    return dump(doc);
}

std::string sweep_to_csv(const std::vector<SweepPoint>& sweep) {
    std::string out = "omega_dot_over_2pi_hz";
    const std::size_t count = sweep.empty() ? 0 : sweep.front().frequencies.size();
    for (std::size_t k = 0; k < count; ++k) {
        out += ",mode" + std::to_string(k) + "_hz,mode" + std::to_string(k) + "_label";
    }
    out += '\n';
    for (const auto& p : sweep) {
        out += format_number(p.omega_dot / kTwoPi);
        for (std::size_t k = 0; k < p.frequencies.size(); ++k) {
            out += ',' + format_number(p.frequencies[k]) + ',' + std::string(to_string(p.labels[k]));
        }
        out += '\n';
    }
    return out;
}

std::string scaling_to_json(const ScalingBase& base, const Geometry& target,
                            const ScalingPrediction& prediction) {
    json doc;
    doc["base"] = {{"length_m", base.geometry.length},
                   {"width_m", base.geometry.width},
                   {"f0_hz", base.frequency},
                   {"z_ohm", base.impedance}};
    doc["target"] = {{"length_m", target.length}, {"width_m", target.width}};
    doc["f0_ratio"] = prediction.frequency_ratio;
    doc["z_ratio"] = prediction.impedance_ratio;
    doc["z_ratio_product_form"] = prediction.impedance_ratio_product;
    doc["f0_hz"] = prediction.frequency;
    doc["z_ohm"] = prediction.impedance;
    return dump(doc);
}

}  // namespace scr::io
