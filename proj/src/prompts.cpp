#include "rwr/prompts.hpp"

#include <cctype>
#include <limits>

namespace rwr::prompts {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string extraction(std::string_view context, std::string_view query) {
    std::string out;
    out.reserve(context.size() + query.size() + kExtractionSuffix.size() + 2);
    out.append(context).append(" ").append(query).append(" ").append(kExtractionSuffix);
    return out;
}

std::string verifier(std::string_view summary, std::string_view answer) {
    std::string out = "Summary: ";
    out.append(summary);
    out.append("\nCorrect answer: ");
    out.append(answer);
    out.append(
        "\nDoes the summary contain information consistent with the correct answer? "
        "Reply Yes or No on the first line.");
    return out;
}

std::string locator(const std::vector<Paragraph>& paragraphs, std::string_view query,
                    std::string_view answer) {
    std::string out = "Paragraphs:\n";
    for (const auto& p : paragraphs) {
        out += "[" + std::to_string(p.index) + "] ";
        out.append(p.text);
        out += "\n\n";
    }
    out += "Question: ";
    out.append(query);
    out += "\nAnswer: ";
    out.append(answer);
    out += "\nReply with the indices of paragraphs that contain the answer, comma-separated.";
    return out;
}

std::string answering(std::string_view context, std::string_view query) {
    std::string out;
    if (!context.empty()) {
        out = "Context:\n";
        out.append(context);
        out += "\n\n";
    }
    out += "Question: ";
    out.append(query);
    out += "\nAnswer:";
    return out;
}

std::string judge(std::string_view question, std::string_view gold, std::string_view prediction) {
    std::string out = "Question: ";
    out.append(question);
    out += "\nReference answer: ";
    out.append(gold);
    out += "\nCandidate answer: ";
    out.append(prediction);
    out += "\nIs the candidate answer correct with respect to the reference? Reply Yes or No on the first line.";
    return out;
}

std::string first_line(std::string_view reply) {
    const auto nl = reply.find('\n');
    std::string line = trim(reply.substr(0, nl));
    for (auto& c : line) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return line;
}

std::optional<bool> parse_yes_no(std::string_view reply, std::string_view positive) {
    const std::string line = first_line(reply);
    if (line == positive) return true;
    if (line.rfind("no", 0) == 0 &&
        (line.size() == 2 || !std::isalnum(static_cast<unsigned char>(line[2])))) {
        return false;
    }
    return std::nullopt;
}

std::vector<std::size_t> parse_indices(std::string_view reply) {
    std::vector<std::size_t> out;
    std::size_t i = 0;
    while (i < reply.size()) {
        if (!std::isdigit(static_cast<unsigned char>(reply[i]))) {
            ++i;
            continue;
        }
        std::size_t value = 0;
        bool overflow = false;
        while (i < reply.size() && std::isdigit(static_cast<unsigned char>(reply[i]))) {
            const std::size_t digit = static_cast<std::size_t>(reply[i] - '0');
            if (value > (std::numeric_limits<std::size_t>::max() - digit) / 10) overflow = true;
            if (!overflow) value = value * 10 + digit;
            ++i;
        }
        if (!overflow) out.push_back(value);
    }
    return out;
}

}  // namespace rwr::prompts
