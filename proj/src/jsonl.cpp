#include <fstream>
#include <functional>
#include <set>

#include <json.hpp>

#include "rwr/corpus.hpp"
#include "rwr/error.hpp"

namespace rwr {

namespace {

using ordered_json = nlohmann::ordered_json;

const std::string& require_string(const nlohmann::json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(line, std::string("missing key \"") + key + "\"");
    if (!it->is_string()) throw ParseError(line, std::string("key \"") + key + "\" must be a string");
    return it->get_ref<const std::string&>();
}

void for_each_line(const std::filesystem::path& path,
                   const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& err) {
            throw ParseError(number, err.what());
        }
        if (!obj.is_object()) throw ParseError(number, "expected a JSON object");
        fn(obj, number);
    }
    if (in.bad()) throw IoError("read failed: " + path.string());
}

void write_lines(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fn) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    fn(out);
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

std::string dump_line(const ordered_json& j) {
    try {
        return j.dump();
    } catch (const nlohmann::json::type_error& err) {
        throw InvalidArgument(std::string("record is not valid UTF-8: ") + err.what());
    }
}

}  // namespace

std::string example_to_line(const Example& e) {
    ordered_json j;
    j["id"] = e.id;
    j["context"] = e.context;
    j["query"] = e.query;
    j["answer"] = e.answer;
    j["meta"] = ordered_json::object();
    for (const auto& [k, v] : e.meta) j["meta"][k] = v;
    return dump_line(j);
}

std::string record_to_line(const TrainingRecord& r) {
    ordered_json j;
    j["id"] = r.id;
    j["source"] = to_string(r.source);
    j["input_text"] = r.input_text;
    j["target_text"] = r.target_text;
    return dump_line(j);
}

std::vector<Example> read_examples(const std::filesystem::path& path) {
    std::vector<Example> out;
    std::set<std::string> seen;
    for_each_line(path, [&](const nlohmann::json& obj, std::size_t line) {
        Example e;
        e.id = require_string(obj, "id", line);
        e.context = obj.contains("context") ? require_string(obj, "context", line) : "";
        e.query = require_string(obj, "query", line);
        e.answer = obj.contains("answer") ? require_string(obj, "answer", line) : "";
        if (auto it = obj.find("meta"); it != obj.end() && !it->is_null()) {
            if (!it->is_object()) throw ParseError(line, "\"meta\" must be an object");
            for (const auto& [k, v] : it->items()) {
                if (!v.is_string()) throw ParseError(line, "meta value \"" + k + "\" must be a string");
                e.meta[k] = v.get<std::string>();
            }
        }
        if (e.id.empty()) throw ParseError(line, "empty id");
        if (e.query.empty()) throw ParseError(line, "empty query");
        if (!seen.insert(e.id).second) throw ParseError(line, "duplicate id \"" + e.id + "\"");
        out.push_back(std::move(e));
    });
    return out;
}

void write_examples(const std::vector<Example>& examples, const std::filesystem::path& path) {
    write_lines(path, [&](std::ostream& out) {
        for (const auto& e : examples) out << example_to_line(e) << '\n';
    });
}

std::vector<TrainingRecord> read_records(const std::filesystem::path& path) {
    std::vector<TrainingRecord> out;
    for_each_line(path, [&](const nlohmann::json& obj, std::size_t line) {
        TrainingRecord r;
        r.id = require_string(obj, "id", line);
        try {
            r.source = parse_record_source(require_string(obj, "source", line));
        } catch (const InvalidArgument& err) {
            throw ParseError(line, err.what());
        }
        r.input_text = require_string(obj, "input_text", line);
        r.target_text = require_string(obj, "target_text", line);
        out.push_back(std::move(r));
    });
    return out;
}

void write_records(const std::vector<TrainingRecord>& records, const std::filesystem::path& path) {
    write_lines(path, [&](std::ostream& out) {
        for (const auto& r : records) out << record_to_line(r) << '\n';
    });
}

}  // namespace rwr
