#include "rwr/ssa.hpp"

#include "rwr/error.hpp"

namespace rwr::ssa {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Hard-splits an oversized paragraph. Pieces are separated by the whitespace
// run at the cut (words) or by nothing (bytes).
std::vector<Chunk> split_paragraph(std::string_view text, std::size_t limit, LengthUnit unit) {
    std::vector<Chunk> pieces;
    while (!text.empty()) {
        auto head = prefix_within(text, limit, unit);
        // Only invalid UTF-8 can leave nothing to cut; advance one byte.
        if (head.empty()) head = text.substr(0, 1);
        std::string_view rest = text.substr(head.size());
        std::size_t gap = 0;
        if (unit == LengthUnit::WhitespaceWords) {
            while (gap < rest.size() && is_space(rest[gap])) ++gap;
        }
        pieces.push_back({std::string(head), std::string(rest.substr(0, gap))});
        text = rest.substr(gap);
    }
    if (!pieces.empty()) pieces.back().separator.clear();
    return pieces;
}

}  // namespace

void SsaConfig::validate() const {
    if (chunk_units == 0) throw InvalidArgument("chunk_units must be at least 1");
    if (parallelism == 0) throw InvalidArgument("parallelism must be at least 1");
}

std::vector<Chunk> chunk_context(std::string_view context, const SsaConfig& cfg) {
    cfg.validate();
    std::vector<Chunk> chunks;
    if (context.empty()) return chunks;

    const auto paragraphs = segment_paragraphs(context);
    std::string current;
    bool open = false;
    std::string pending_delimiter;  // delimiter between `current` and the next paragraph

    auto flush = [&](std::string separator) {
        chunks.push_back({std::move(current), std::move(separator)});
        current.clear();
        open = false;
    };

    for (const auto& p : paragraphs) {
        if (open) {
            std::string candidate = current + pending_delimiter + p.text;
            if (measure_length(candidate, cfg.unit) <= cfg.chunk_units) {
                current = std::move(candidate);
                pending_delimiter = p.delimiter;
                continue;
            }
            flush(pending_delimiter);
        }
        if (measure_length(p.text, cfg.unit) <= cfg.chunk_units) {
            current = p.text;
        } else {
            auto pieces = split_paragraph(p.text, cfg.chunk_units, cfg.unit);
            for (std::size_t i = 0; i + 1 < pieces.size(); ++i) chunks.push_back(std::move(pieces[i]));
            current = std::move(pieces.back().text);
        }
        open = true;
        pending_delimiter = p.delimiter;
    }
    if (open) flush(std::string());
    return chunks;
}

std::string summarize_chunk(std::string_view chunk, std::string_view query, const ChatBackend& student) {
    if (chunk.empty()) throw InvalidArgument("cannot summarize an empty chunk");
    return prompts::trim(student.complete(ChatExchange::user(prompts::extraction(chunk, query))).text);
}

std::string aggregate_summaries(const std::vector<std::string>& summaries, const SsaConfig& cfg) {
    if (summaries.empty()) throw InvalidArgument("no summaries to aggregate");
    std::vector<const std::string*> kept;
    for (const auto& s : summaries) {
        if (cfg.drop_refusals && prompts::trim(s) == cfg.refusal) continue;
        kept.push_back(&s);
    }
    if (kept.empty()) return cfg.refusal;
    std::string out;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (i > 0) out += kParagraphDelimiter;
        out += *kept[i];
    }
    return out;
}

SsaTrace ssa_answer(const Example& e, const SsaConfig& cfg, const ChatBackend& student) {
    if (e.query.empty()) throw InvalidArgument("example '" + e.id + "' has an empty query");
    SsaTrace trace;
    trace.id = e.id;
    trace.mode = "ssa";

    const auto chunks = chunk_context(e.context, cfg);
    std::vector<ChatExchange> requests;
    requests.reserve(chunks.size());
    for (const auto& c : chunks) requests.push_back(ChatExchange::user(prompts::extraction(c.text, e.query)));
    const auto replies = complete_batch(student, requests, cfg.parallelism);

    std::vector<std::string> summaries;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        const auto& completion = replies[i].value();
        trace.latency_ms.summarize_ms += completion.latency_ms;
        summaries.push_back(prompts::trim(completion.text));
        trace.chunks.push_back({chunks[i].text, summaries.back()});
    }
    trace.aggregate = summaries.empty() ? cfg.refusal : aggregate_summaries(summaries, cfg);

    const auto final = student.complete(ChatExchange::user(prompts::answering(trace.aggregate, e.query)));
    trace.answer = prompts::trim(final.text);
    trace.latency_ms.answer_ms = final.latency_ms;
    trace.student_calls = chunks.size() + 1;
    return trace;
}

DirectAnswer direct_answer(const Example& e, std::size_t window_units, const ChatBackend& student,
                           LengthUnit unit) {
    if (window_units == 0) throw InvalidArgument("window_units must be positive");
    const auto windowed = truncate_example(e, LengthPolicy{unit, window_units});
    DirectAnswer out;
    out.prompt = prompts::answering(windowed.context, windowed.query);
    const auto completion = student.complete(ChatExchange::user(out.prompt));
    out.answer = prompts::trim(completion.text);
    out.latency_ms = completion.latency_ms;
    return out;
}

SsaTrace direct_trace(const Example& e, std::size_t window_units, const ChatBackend& student, LengthUnit unit) {
    const auto direct = direct_answer(e, window_units, student, unit);
    SsaTrace trace;
    trace.id = e.id;
    trace.mode = "direct";
    trace.answer = direct.answer;
    trace.latency_ms.answer_ms = direct.latency_ms;
    trace.student_calls = 1;
    return trace;
}

nlohmann::ordered_json trace_to_json(const SsaTrace& trace) {
    nlohmann::ordered_json j;
    j["id"] = trace.id;
    j["mode"] = trace.mode;
    j["chunks"] = nlohmann::ordered_json::array();
    for (const auto& c : trace.chunks) {
        j["chunks"].push_back({{"chunk_text", c.chunk_text}, {"summary_text", c.summary_text}});
    }
    j["aggregate"] = trace.aggregate;
    j["answer"] = trace.answer;
    j["latency_ms"] = {{"summarize", trace.latency_ms.summarize_ms}, {"answer", trace.latency_ms.answer_ms}};
    j["student_calls"] = trace.student_calls;
    return j;
}

SsaTrace trace_from_json(const nlohmann::json& j) {
    SsaTrace t;
    try {
        t.id = j.at("id").get<std::string>();
        t.mode = j.at("mode").get<std::string>();
        for (const auto& c : j.at("chunks")) {
            t.chunks.push_back({c.at("chunk_text").get<std::string>(), c.at("summary_text").get<std::string>()});
        }
        t.aggregate = j.at("aggregate").get<std::string>();
        t.answer = j.at("answer").get<std::string>();
        t.latency_ms.summarize_ms = j.at("latency_ms").at("summarize").get<double>();
        t.latency_ms.answer_ms = j.at("latency_ms").at("answer").get<double>();
        t.student_calls = j.value("student_calls", std::size_t{0});
    } catch (const nlohmann::json::exception& err) {
        throw ParseError(0, std::string("malformed trace: ") + err.what());
    }
    return t;
}

}  // namespace rwr::ssa

namespace rwr::ssa {

std::string_view to_string(Mode mode) { return mode == Mode::Ssa ? "ssa" : "direct"; }

Mode parse_mode(std::string_view name) {
    if (name == "ssa") return Mode::Ssa;
    if (name == "direct") return Mode::Direct;
    throw InvalidArgument("unknown inference mode '" + std::string(name) + "'");
}

std::vector<SsaTrace> run_inference(const std::vector<Example>& examples, const InferenceOptions& options,
                                    const ChatBackend& student) {
    options.ssa.validate();
    if (options.parallelism == 0) throw InvalidArgument("parallelism must be at least 1");
    std::vector<SsaTrace> traces(examples.size());
    std::vector<std::exception_ptr> errors(examples.size());
    parallel_for(examples.size(), options.parallelism, [&](std::size_t i) {
        try {
            traces[i] = options.mode == Mode::Ssa
                            ? ssa_answer(examples[i], options.ssa, student)
                            : direct_trace(examples[i], options.window_units, student, options.ssa.unit);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
    return traces;
}

}  // namespace rwr::ssa
