#include "dtwc/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace dtwc {

namespace {

// RFC-4180 field splitter; returns one vector of fields per record.
std::vector<std::vector<std::string>> split_csv(const std::string& content) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;

    std::size_t i = 0;
    // Skip a UTF-8 BOM if present.
    if (content.size() >= 3 && content.compare(0, 3, "\xef\xbb\xbf") == 0) i = 3;

    auto end_field = [&]() {
        fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    auto end_record = [&]() {
        end_field();
        rows.push_back(std::move(fields));
        fields.clear();
    };

    bool at_field_start = true;
    for (; i < content.size(); ++i) {
        char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (at_field_start && c == '"') {
            in_quotes = true;
            field_was_quoted = true;
            at_field_start = false;
            continue;
        }
        if (c == ',') {
            end_field();
            at_field_start = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < content.size() && content[i + 1] == '\n') ++i;
            end_record();
            at_field_start = true;
        } else {
            if (field_was_quoted) {
                throw Error(ErrorCode::io_failure,
                            "stray character after closing quote near byte " + std::to_string(i));
            }
            field.push_back(c);
            at_field_start = false;
        }
    }
    if (in_quotes) throw Error(ErrorCode::io_failure, "unterminated quoted field");
    if (!field.empty() || !fields.empty() || field_was_quoted) end_record();

    // Drop records that are a single empty field (blank lines).
    std::erase_if(rows, [](const std::vector<std::string>& r) {
        return r.size() == 1 && r[0].empty();
    });
    return rows;
}

std::optional<std::string> opt_field(std::string value) {
    if (value.empty()) return std::nullopt;
    return value;
}

} // namespace

std::vector<TweetRecord> parse_csv(const std::string& content) {
    auto rows = split_csv(content);
    if (rows.empty()) throw Error(ErrorCode::missing_column, "file has no header row");

    const auto& header = rows.front();
    const std::vector<std::string> want = {"id", "keyword", "location", "text", "target"};
    bool has_target = false;
    if (header.size() == 5) {
        has_target = true;
    } else if (header.size() != 4) {
        throw Error(ErrorCode::missing_column, "expected 4 or 5 header columns, got " +
                                                   std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] != want[c]) {
            throw Error(ErrorCode::missing_column, "header column " + std::to_string(c) +
                                                       " is '" + header[c] + "', expected '" +
                                                       want[c] + "'");
        }
    }

    std::vector<TweetRecord> records;
    records.reserve(rows.size() - 1);
    std::unordered_set<std::int64_t> seen_ids;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size()) {
            throw Error(ErrorCode::io_failure, "row " + std::to_string(r) + " has " +
                                                   std::to_string(row.size()) + " fields, expected " +
                                                   std::to_string(header.size()));
        }
        TweetRecord rec;
        try {
            rec.id = std::stoll(row[0]);
        } catch (const std::exception&) {
            throw Error(ErrorCode::io_failure, "row " + std::to_string(r) + " has non-integer id '" + row[0] + "'");
        }
        if (!seen_ids.insert(rec.id).second) {
            throw Error(ErrorCode::duplicate_id, "id " + std::to_string(rec.id) + " appears twice");
        }
        rec.keyword = opt_field(row[1]);
        rec.location = opt_field(row[2]);
        rec.text = row[3];
        if (rec.text.empty()) {
            throw Error(ErrorCode::empty_text, "row " + std::to_string(r) + " has empty text");
        }
        if (has_target && !row[4].empty()) {
            if (row[4] == "0") {
                rec.target = 0;
            } else if (row[4] == "1") {
                rec.target = 1;
            } else {
                throw Error(ErrorCode::non_binary_target,
                            "row " + std::to_string(r) + " has target '" + row[4] + "'");
            }
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<TweetRecord> load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_failure, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::io_failure, "read error on '" + path + "'");
    return parse_csv(buf.str());
}

DatasetStats dataset_stats(const std::vector<TweetRecord>& records) {
    DatasetStats stats;
    stats.total = records.size();
    for (const auto& rec : records) {
        if (rec.target.has_value()) {
            stats.per_class[static_cast<std::size_t>(*rec.target)]++;
        } else {
            stats.unlabeled++;
        }
    }
    return stats;
}

std::pair<std::vector<TweetRecord>, std::size_t> dedup(const std::vector<TweetRecord>& records) {
    // -1 encodes "unlabeled" so it conflicts with either label.
    std::unordered_map<std::string, std::unordered_set<int>> targets_by_text;
    for (const auto& rec : records) {
        targets_by_text[rec.text].insert(rec.target.value_or(-1));
    }

    std::vector<TweetRecord> kept;
    std::size_t removed = 0;
    std::unordered_set<std::string> emitted;
    for (const auto& rec : records) {
        if (targets_by_text.at(rec.text).size() > 1) {
            ++removed; // conflicting labels: every occurrence goes
            continue;
        }
        if (!emitted.insert(rec.text).second) {
            ++removed; // exact duplicate: keep first occurrence only
            continue;
        }
        kept.push_back(rec);
    }
    return {std::move(kept), removed};
}

std::pair<std::vector<TweetRecord>, std::vector<TweetRecord>>
stratified_split(const std::vector<TweetRecord>& records, const SplitSpec& spec) {
    if (spec.val_fraction < 0.0 || spec.val_fraction >= 1.0) {
        throw std::invalid_argument("val_fraction must be in [0,1)");
    }
    for (const auto& rec : records) {
        if (!rec.target.has_value()) {
            throw Error(ErrorCode::unlabeled_record,
                        "record id " + std::to_string(rec.id) + " has no target");
        }
    }

    auto round_half_up = [](double x) {
        return static_cast<std::size_t>(std::floor(x + 0.5));
    };

    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < records.size(); ++i) {
        by_class[static_cast<std::size_t>(*records[i].target)].push_back(i);
    }

    std::vector<std::size_t> val_indices;
    std::mt19937_64 rng(spec.seed);

    if (spec.stratified) {
        if (spec.val_fraction > 0.0) {
            for (int c = 0; c < 2; ++c) {
                if (by_class[static_cast<std::size_t>(c)].empty()) {
                    throw Error(ErrorCode::empty_class, "class " + std::to_string(c) + " has no records");
                }
            }
        }
        std::array<std::size_t, 2> take = {
            round_half_up(spec.val_fraction * static_cast<double>(by_class[0].size())),
            round_half_up(spec.val_fraction * static_cast<double>(by_class[1].size())),
        };
        // Charge any rounding remainder against the majority class.
        std::size_t want_total = round_half_up(spec.val_fraction * static_cast<double>(records.size()));
        std::size_t majority = by_class[0].size() >= by_class[1].size() ? 0 : 1;
        std::size_t have = take[0] + take[1];
        if (want_total > have) {
            take[majority] += want_total - have;
        } else if (have > want_total) {
            std::size_t give_back = have - want_total;
            take[majority] -= std::min(take[majority], give_back);
        }
        for (std::size_t c = 0; c < 2; ++c) {
            auto pool = by_class[c];
            std::shuffle(pool.begin(), pool.end(), rng);
            take[c] = std::min(take[c], pool.size());
            val_indices.insert(val_indices.end(), pool.begin(),
                               pool.begin() + static_cast<std::ptrdiff_t>(take[c]));
        }
    } else {
        std::vector<std::size_t> pool(records.size());
        for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
        std::shuffle(pool.begin(), pool.end(), rng);
        std::size_t take = round_half_up(spec.val_fraction * static_cast<double>(records.size()));
        val_indices.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
    }

    std::sort(val_indices.begin(), val_indices.end());
    std::vector<TweetRecord> train;
    std::vector<TweetRecord> val;
    val.reserve(val_indices.size());
    train.reserve(records.size() - val_indices.size());
    std::size_t next_val = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (next_val < val_indices.size() && val_indices[next_val] == i) {
            val.push_back(records[i]);
            ++next_val;
        } else {
            train.push_back(records[i]);
        }
    }
    return {std::move(train), std::move(val)};
}

} // namespace dtwc
