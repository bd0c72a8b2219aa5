#include "dtwc/cleanse.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace dtwc {

namespace {

bool is_ascii_alnum(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || (u >= '0' && u <= '9');
}

bool is_ascii_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string lower_copy(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(), ascii_lower);
    return out;
}

bool is_email_local_char(char c) {
    return is_ascii_alnum(c) || c == '.' || c == '_' || c == '%' || c == '+' || c == '-';
}

bool is_email_domain_char(char c) { return is_ascii_alnum(c) || c == '.' || c == '-'; }

std::string step_case(const std::string& text) { return lower_copy(text); }

std::string step_remove_emails(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t at = text.find('@', i);
        if (at == std::string::npos) {
            out.append(text, i, text.size() - i);
            break;
        }
        std::size_t local_start = at;
        while (local_start > i && is_email_local_char(text[local_start - 1])) --local_start;
        std::size_t domain_end = at + 1;
        while (domain_end < text.size() && is_email_domain_char(text[domain_end])) ++domain_end;
        std::size_t trimmed_end = domain_end;
        while (trimmed_end > at + 1 && (text[trimmed_end - 1] == '.' || text[trimmed_end - 1] == '-'))
            --trimmed_end;

        bool valid = local_start < at && trimmed_end > at + 1;
        if (valid) {
            // domain needs a dot and an alphabetic top-level label of length >= 2
            std::string domain = text.substr(at + 1, trimmed_end - at - 1);
            std::size_t last_dot = domain.rfind('.');
            valid = last_dot != std::string::npos && last_dot > 0 && last_dot + 3 <= domain.size();
            if (valid) {
                for (std::size_t k = last_dot + 1; k < domain.size(); ++k) {
                    char c = ascii_lower(domain[k]);
                    if (c < 'a' || c > 'z') {
                        valid = false;
                        break;
                    }
                }
            }
        }
        if (valid) {
            out.append(text, i, local_start - i);
            i = trimmed_end;
        } else {
            out.append(text, i, at + 1 - i);
            i = at + 1;
        }
    }
    return out;
}

std::string step_remove_urls(const std::string& text) {
    std::string lowered = lower_copy(text);
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        bool matched = false;
        std::size_t start = i;
        if (lowered.compare(i, 7, "http://") == 0 || lowered.compare(i, 8, "https://") == 0) {
            matched = true;
        } else if (lowered.compare(i, 4, "www.") == 0 &&
                   (i == 0 || !is_ascii_alnum(text[i - 1])) &&
                   i + 4 < text.size() && !is_ascii_space(text[i + 4]) && text[i + 4] != '.') {
            matched = true;
        }
        if (matched) {
            std::size_t j = start;
            while (j < text.size() && !is_ascii_space(text[j])) ++j;
            i = j; // drop [start, j)
        } else {
            out.push_back(text[i]);
            ++i;
        }
    }
    return out;
}

std::string step_remove_html(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '<') {
            std::size_t close = text.find('>', i + 1);
            if (close != std::string::npos) {
                i = close + 1;
                continue;
            }
        } else if (c == '&') {
            // named (&amp;) or numeric (&#8230;) entity
            std::size_t j = i + 1;
            bool numeric = j < text.size() && text[j] == '#';
            if (numeric) ++j;
            std::size_t body_start = j;
            while (j < text.size() && j - body_start < 8 &&
                   (numeric ? (text[j] >= '0' && text[j] <= '9')
                            : is_ascii_alnum(text[j]) && !(text[j] >= '0' && text[j] <= '9'))) {
                ++j;
            }
            if (j > body_start && j < text.size() && text[j] == ';') {
                i = j + 1;
                continue;
            }
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

// Decodes one UTF-8 sequence at i; returns codepoint and length, or length 0
// when the bytes are not valid UTF-8.
std::pair<char32_t, std::size_t> decode_utf8(const std::string& s, std::size_t i) {
    unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) return {b0, 1};
    auto cont = [&](std::size_t k) {
        return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    };
    if ((b0 & 0xE0) == 0xC0 && cont(1)) {
        char32_t cp = static_cast<char32_t>((b0 & 0x1F) << 6 |
                                            (static_cast<unsigned char>(s[i + 1]) & 0x3F));
        return cp >= 0x80 ? std::pair<char32_t, std::size_t>{cp, 2}
                          : std::pair<char32_t, std::size_t>{0, 0};
    }
    if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
        char32_t cp = static_cast<char32_t>((b0 & 0x0F) << 12 |
                                            (static_cast<unsigned char>(s[i + 1]) & 0x3F) << 6 |
                                            (static_cast<unsigned char>(s[i + 2]) & 0x3F));
        return cp >= 0x800 ? std::pair<char32_t, std::size_t>{cp, 3}
                           : std::pair<char32_t, std::size_t>{0, 0};
    }
    if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
        char32_t cp = static_cast<char32_t>((b0 & 0x07) << 18 |
                                            (static_cast<unsigned char>(s[i + 1]) & 0x3F) << 12 |
                                            (static_cast<unsigned char>(s[i + 2]) & 0x3F) << 6 |
                                            (static_cast<unsigned char>(s[i + 3]) & 0x3F));
        return (cp >= 0x10000 && cp <= 0x10FFFF) ? std::pair<char32_t, std::size_t>{cp, 4}
                                                 : std::pair<char32_t, std::size_t>{0, 0};
    }
    return {0, 0};
}

std::string step_remove_emojis(const std::string& text,
                               const std::vector<std::pair<char32_t, char32_t>>& ranges) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        auto [cp, len] = decode_utf8(text, i);
        if (len == 0) {
            out.push_back(text[i]);
            ++i;
            continue;
        }
        bool is_emoji = false;
        for (const auto& [lo, hi] : ranges) {
            if (cp >= lo && cp <= hi) {
                is_emoji = true;
                break;
            }
        }
        if (is_emoji) {
            out.push_back(' ');
        } else {
            out.append(text, i, len);
        }
        i += len;
    }
    return out;
}

// Applies fn to each maximal ASCII-alphanumeric run; fn returns the
// replacement text (or the run itself).
template <typename Fn>
std::string map_word_runs(const std::string& text, Fn&& fn) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (is_ascii_alnum(text[i])) {
            std::size_t j = i;
            while (j < text.size() && is_ascii_alnum(text[j])) ++j;
            out += fn(text.substr(i, j - i));
            i = j;
        } else {
            out.push_back(text[i]);
            ++i;
        }
    }
    return out;
}

std::string step_replace_abbreviations(const std::string& text,
                                       const std::map<std::string, std::string>& map) {
    return map_word_runs(text, [&](const std::string& run) {
        auto it = map.find(lower_copy(run));
        return it == map.end() ? run : it->second;
    });
}

std::string step_remove_stopwords(const std::string& text,
                                  const std::unordered_set<std::string>& stopwords) {
    return map_word_runs(text, [&](const std::string& run) {
        return stopwords.count(lower_copy(run)) ? std::string() : run;
    });
}

std::string step_remove_special_chars(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (is_ascii_alnum(c) || is_ascii_space(c)) {
            out.push_back(c);
        } else {
            out.push_back(' ');
        }
    }
    return out;
}

bool is_ascii_punct(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return u > 0x20 && u < 0x7F && !is_ascii_alnum(c);
}

std::string step_remove_repeated(const std::string& text) {
    // collapse runs of the same punctuation character
    std::string collapsed;
    collapsed.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (i > 0 && text[i] == text[i - 1] && is_ascii_punct(text[i])) continue;
        collapsed.push_back(text[i]);
    }
    // collapse immediately repeated identical tokens
    std::istringstream in(collapsed);
    std::string token;
    std::string prev;
    std::string out;
    while (in >> token) {
        if (token == prev) continue;
        if (!out.empty()) out.push_back(' ');
        out += token;
        prev = token;
    }
    return out;
}

std::string collapse_whitespace(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (is_ascii_space(c)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

} // namespace

const std::array<CleanseStep, kCleanseStepCount>& default_step_order() {
    static const std::array<CleanseStep, kCleanseStepCount> order = {
        CleanseStep::case_normalization,  CleanseStep::remove_emails,
        CleanseStep::remove_urls,         CleanseStep::remove_html_tags,
        CleanseStep::remove_emojis,       CleanseStep::replace_abbreviations,
        CleanseStep::remove_stopwords,    CleanseStep::remove_special_chars,
        CleanseStep::remove_repeated_punct,
    };
    return order;
}

const char* step_name(CleanseStep step) {
    switch (step) {
        case CleanseStep::case_normalization: return "case_normalization";
        case CleanseStep::remove_emails: return "remove_emails";
        case CleanseStep::remove_urls: return "remove_urls";
        case CleanseStep::remove_html_tags: return "remove_html_tags";
        case CleanseStep::remove_emojis: return "remove_emojis";
        case CleanseStep::replace_abbreviations: return "replace_abbreviations";
        case CleanseStep::remove_stopwords: return "remove_stopwords";
        case CleanseStep::remove_special_chars: return "remove_special_chars";
        case CleanseStep::remove_repeated_punct: return "remove_repeated_punct";
    }
    return "?";
}

CleanseStep step_from_name(const std::string& name) {
    for (CleanseStep step : default_step_order()) {
        if (name == step_name(step)) return step;
    }
    throw Error(ErrorCode::unknown_step, "'" + name + "' is not a cleansing step");
}

CleansingConfig CleansingConfig::bare() {
    CleansingConfig config;
    config.steps.assign(default_step_order().begin(), default_step_order().end());
    return config;
}

CleansingConfig CleansingConfig::from_files(const std::string& stopwords_path,
                                            const std::string& abbreviations_path,
                                            const std::string& emoji_ranges_path) {
    CleansingConfig config = bare();
    config.stopword_set = load_stopwords(stopwords_path);
    config.abbreviation_map = load_abbreviations(abbreviations_path);
    config.emoji_ranges = load_emoji_ranges(emoji_ranges_path);
    return config;
}

std::unordered_set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_failure, "cannot open stopword file '" + path + "'");
    std::unordered_set<std::string> set;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        set.insert(lower_copy(line));
    }
    return set;
}

std::map<std::string, std::string> load_abbreviations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_failure, "cannot open abbreviation file '" + path + "'");
    std::map<std::string, std::string> map;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
            throw Error(ErrorCode::io_failure, path + ":" + std::to_string(lineno) +
                                                   ": expected key<TAB>value");
        }
        map[lower_copy(line.substr(0, tab))] = lower_copy(line.substr(tab + 1));
    }
    return map;
}

std::vector<std::pair<char32_t, char32_t>> load_emoji_ranges(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_failure, "cannot open emoji range file '" + path + "'");
    std::vector<std::pair<char32_t, char32_t>> ranges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::size_t dash = line.find('-');
        try {
            if (dash == std::string::npos) {
                char32_t cp = static_cast<char32_t>(std::stoul(line, nullptr, 16));
                ranges.emplace_back(cp, cp);
            } else {
                char32_t lo = static_cast<char32_t>(std::stoul(line.substr(0, dash), nullptr, 16));
                char32_t hi = static_cast<char32_t>(std::stoul(line.substr(dash + 1), nullptr, 16));
                ranges.emplace_back(lo, hi);
            }
        } catch (const std::exception&) {
            throw Error(ErrorCode::io_failure,
                        path + ":" + std::to_string(lineno) + ": bad codepoint range '" + line + "'");
        }
    }
    return ranges;
}

std::string cleanse_step(CleanseStep step, const std::string& text, const CleansingConfig& config) {
    switch (step) {
        case CleanseStep::case_normalization: return step_case(text);
        case CleanseStep::remove_emails: return step_remove_emails(text);
        case CleanseStep::remove_urls: return step_remove_urls(text);
        case CleanseStep::remove_html_tags: return step_remove_html(text);
        case CleanseStep::remove_emojis: return step_remove_emojis(text, config.emoji_ranges);
        case CleanseStep::replace_abbreviations:
            return step_replace_abbreviations(text, config.abbreviation_map);
        case CleanseStep::remove_stopwords: return step_remove_stopwords(text, config.stopword_set);
        case CleanseStep::remove_special_chars: return step_remove_special_chars(text);
        case CleanseStep::remove_repeated_punct: return step_remove_repeated(text);
    }
    throw Error(ErrorCode::unknown_step, "unhandled step");
}

std::string cleanse_step(const std::string& step, const std::string& text,
                         const CleansingConfig& config) {
    return cleanse_step(step_from_name(step), text, config);
}

std::string cleanse_text(const std::string& raw, const CleansingConfig& config) {
    std::string text = raw;
    for (CleanseStep step : config.steps) {
        text = cleanse_step(step, text, config);
    }
    return collapse_whitespace(text);
}

TokenSequence tokenize(const std::string& clean) {
    TokenSequence tokens;
    std::istringstream in(clean);
    std::string token;
    while (in >> token) tokens.push_back(std::move(token));
    return tokens;
}

} // namespace dtwc
