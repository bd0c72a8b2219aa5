#include "support/fixture.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#ifndef DTWC_TEST_DATA_DIR
#define DTWC_TEST_DATA_DIR "data"
#endif
#ifndef DTWC_TEST_TMP_DIR
#define DTWC_TEST_TMP_DIR "/tmp"
#endif

namespace dtwc::testfix {

namespace {

// Difficulty knobs, calibrated so the classical baselines land inside the
// documented acceptance bands on the synthetic corpus.
constexpr double kOwnPool = 0.34;    // chance a content token is class-specific
constexpr double kSharedPool = 0.42; // chance it comes from the shared pool
constexpr double kLabelNoise = 0.16; // chance a tweet is drawn from the wrong pools

constexpr std::size_t kTotalRows = 7613;
constexpr std::size_t kClass0Rows = 4342;
constexpr std::size_t kClass1Rows = 3271;
constexpr std::size_t kConflictTexts = 9;  // appear once per label
constexpr std::size_t kDup0 = 28;          // exact duplicates, class 0
constexpr std::size_t kDup1 = 22;          // exact duplicates, class 1

// Topical vocabulary is Zipf-shaped, like a real tweet corpus: a small head of
// frequent stems plus a long tail of rare hashtag-style compounds
// ("stormalert", "brunchpics", ...).  Bag-of-words models exploit exact token
// identity across both halves, while embeddings trained from scratch only get
// enough contexts to learn the head — the same pressure a real small corpus
// applies to word vectors.
constexpr double kHeadFraction = 0.32; // chance a topical token is a head stem
constexpr double kHeadBurst = 0.85;    // chance a head token arrives as an adjacent pair

std::vector<std::string> tail_pool(const std::vector<std::string>& stems,
                                   const std::vector<std::string>& suffixes) {
    std::vector<std::string> pool;
    pool.reserve(stems.size() * suffixes.size());
    for (const auto& stem : stems)
        for (const auto& suffix : suffixes) pool.push_back(stem + suffix);
    return pool;
}

const std::vector<std::string> kDisaster = {
    "fire", "flood", "earthquake", "storm", "evacuation", "rescue", "damage", "collapse",
    "wildfire", "hurricane", "tornado", "victims", "emergency", "blast", "explosion", "smoke",
    "ash", "debris", "survivors", "casualties", "flooding", "quake", "tsunami", "landslide",
    "wreckage", "derailment", "burning", "rubble", "sirens", "evacuate", "shelter",
    "aftershock", "mudslide", "outbreak", "curfew", "blackout", "inferno", "airlift",
    "distress", "mayday", "disaster", "catastrophe", "devastation", "responders",
    "paramedics", "crisis", "hazard", "eruption"};

// The head is a deliberately small slice of the stems so each head word stays
// frequent enough for context-averaged embeddings to learn it.
const std::vector<std::string> kDisasterHead(kDisaster.begin(), kDisaster.begin() + 8);

const std::vector<std::string> kDisasterTail =
    tail_pool(kDisaster, {"alert", "update", "watch", "zone", "scene", "report", "warning",
                          "relief"});

const std::vector<std::string> kEveryday = {
    "coffee", "breakfast", "weekend", "movie", "music", "concert", "puppy", "garden",
    "recipe", "birthday", "vacation", "sunshine", "beach", "picnic", "painting", "novel",
    "coding", "soccer", "yoga", "brunch", "cupcake", "selfie", "playlist", "fashion",
    "makeup", "gaming", "podcast", "hiking", "camping", "barbecue", "lemonade", "smoothie",
    "kitten", "sunset", "photography", "journal", "thrift", "housewarming", "marathon",
    "wedding", "bakery", "cinema", "museum", "library", "gallery", "festival", "karaoke",
    "aquarium"};

const std::vector<std::string> kEverydayHead(kEveryday.begin(), kEveryday.begin() + 8);

const std::vector<std::string> kEverydayTail =
    tail_pool(kEveryday, {"time", "club", "fun", "vibes", "plan", "spot", "pics", "love"});

const std::vector<std::string> kShared = {
    "city", "night", "light", "heat", "wind", "rain", "snow", "river", "bridge", "road",
    "train", "station", "park", "field", "ground", "wave", "crowd", "street", "corner",
    "building", "window", "glass", "door", "roof", "wall", "yard", "alley", "harbor",
    "coast", "hill", "valley", "forest", "trail", "tower", "plaza", "market", "square",
    "block", "crane", "tunnel"};

const std::vector<std::string> kFiller = {"really", "totally", "honestly", "maybe",
                                          "literally", "seriously", "basically", "actually",
                                          "probably", "definitely", "apparently", "somewhat"};

const std::vector<std::string> kStop = {"the", "and", "a", "to", "in", "of", "is", "was",
                                        "on", "for", "with", "at", "this", "that", "are",
                                        "be", "it", "from"};

const std::vector<std::string> kAbbrevKeys = {"omg", "lol", "u", "gr8", "b4", "idk",
                                              "btw", "thx", "pls", "2day", "smh"};

const std::vector<std::string> kEmoji = {
    "\xF0\x9F\x94\xA5",  // flame
    "\xF0\x9F\x98\xB1",  // scream
    "\xF0\x9F\x99\x8F",  // folded hands
    "\xF0\x9F\x98\x82",  // tears of joy
    "\xF0\x9F\x8C\x8A"}; // water wave

const std::vector<std::string> kUsers = {
    "stormwatcher", "newsfeed", "dailyupdates", "cityalerts", "localreporter", "weathergeek",
    "morningshow", "nightowl", "trendspot", "viewpoint", "chatterbox", "signalboost"};

const std::vector<std::string> kLocations = {
    "london", "sydney", "portland, or", "austin, tx", "the \"rose\" city",
    "tokyo", "nairobi", "wellington, nz", "berlin", "toronto, on"};

double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

const std::string& pick(std::mt19937_64& rng, const std::vector<std::string>& pool) {
    return pool[static_cast<std::size_t>(rng() % pool.size())];
}

std::string upper(std::string s) {
    for (char& c : s)
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    return s;
}

std::string make_url(std::mt19937_64& rng) {
    static const char* b36 = "abcdefghijklmnopqrstuvwxyz0123456789";
    std::string tail;
    for (int i = 0; i < 8; ++i) tail.push_back(b36[rng() % 36]);
    return (rng() % 2 ? "http://t.co/" : "https://news.example.com/") + tail;
}

std::string make_tweet(int label, std::mt19937_64& rng) {
    const bool flipped = u01(rng) < kLabelNoise;
    const bool disasterish = (label == 1) != flipped;
    const auto& own_head = disasterish ? kDisasterHead : kEverydayHead;
    const auto& own_tail = disasterish ? kDisasterTail : kEverydayTail;

    std::vector<std::string> tokens;
    const std::size_t content = 6 + rng() % 8;
    for (std::size_t i = 0; i < content; ++i) {
        const double r = u01(rng);
        if (r < kOwnPool) {
            if (u01(rng) < kHeadFraction) {
                // Topical terms often repeat back-to-back in tweets; the burst
                // also gives context-averaged embeddings head-head windows.
                tokens.push_back(pick(rng, own_head));
                if (u01(rng) < kHeadBurst) tokens.push_back(pick(rng, own_head));
            } else {
                tokens.push_back(pick(rng, own_tail));
            }
        } else if (r < kOwnPool + kSharedPool) {
            tokens.push_back(pick(rng, kShared));
        } else {
            tokens.push_back(pick(rng, kFiller));
        }
    }

    // Tweet-style noise.
    const std::size_t stops = 2 + rng() % 4;
    for (std::size_t i = 0; i < stops; ++i)
        tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(rng() % (tokens.size() + 1)),
                      pick(rng, kStop));
    if (u01(rng) < 0.25)
        tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(rng() % (tokens.size() + 1)),
                      pick(rng, kAbbrevKeys));
    if (u01(rng) < 0.12)
        tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(rng() % (tokens.size() + 1)),
                      "@" + pick(rng, kUsers));
    for (auto& tok : tokens)
        if (u01(rng) < 0.18) tok = upper(tok);
    if (u01(rng) < 0.08) {
        const std::size_t at = rng() % tokens.size();
        tokens[at] = "<b>" + tokens[at] + "</b>";
    }
    if (u01(rng) < 0.04) {
        tokens.push_back("details");
        tokens.push_back("crew" + std::to_string(rng() % 90 + 10) + "@example.com");
    }
    if (u01(rng) < 0.22) tokens.push_back(make_url(rng));
    if (u01(rng) < 0.18) tokens.push_back(pick(rng, kEmoji));
    if (u01(rng) < 0.20) {
        static const std::vector<std::string> punct = {"!!!", "???", "...", "!?!?"};
        tokens.push_back(pick(rng, punct));
    }

    std::string text;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) text += ' ';
        text += tokens[i];
    }
    if (u01(rng) < 0.002 && text.size() > 20) text[text.size() / 2] = '\n';
    return text;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

struct Row {
    std::string keyword, location, text;
    int target = 0;
};

} // namespace

std::string data_dir() { return DTWC_TEST_DATA_DIR; }

std::string synthetic_csv() {
    static const std::string cached = [] {
        std::mt19937_64 rng(20250816ULL);

        std::vector<Row> rows;
        rows.reserve(kTotalRows);
        std::set<std::string> seen;
        std::vector<std::size_t> by_class[2];

        auto decorate = [&rng](Row& row) {
            if (u01(rng) < 0.30)
                row.keyword = pick(rng, row.target == 1 ? kDisaster : kEveryday);
            if (u01(rng) < 0.25) row.location = pick(rng, kLocations);
        };

        // Unique base rows.
        const std::size_t base0 = kClass0Rows - kConflictTexts - kDup0;
        const std::size_t base1 = kClass1Rows - kConflictTexts - kDup1;
        auto gen_base = [&](int label, std::size_t count) {
            for (std::size_t i = 0; i < count;) {
                Row row;
                row.target = label;
                row.text = make_tweet(label, rng);
                if (!seen.insert(row.text).second) continue;
                decorate(row);
                by_class[label].push_back(rows.size());
                rows.push_back(std::move(row));
                ++i;
            }
        };
        gen_base(0, base0);
        gen_base(1, base1);

        // Conflicting-label duplicates: same text, both targets.
        for (std::size_t i = 0; i < kConflictTexts; ++i) {
            std::string text = "witnesses said the " + pick(rng, kShared) + " near the " +
                               pick(rng, kShared) + " was " + pick(rng, kFiller) + " " +
                               pick(rng, kShared) + " " + std::to_string(i);
            for (int label : {0, 1}) {
                Row row;
                row.target = label;
                row.text = text;
                rows.push_back(std::move(row));
            }
        }

        // Exact duplicates of earlier rows (same text, same label).
        auto gen_dups = [&](int label, std::size_t count) {
            for (std::size_t i = 0; i < count; ++i) {
                const auto& src = rows[by_class[label][rng() % by_class[label].size()]];
                Row row;
                row.target = label;
                row.text = src.text;
                row.keyword = src.keyword;
                row.location = src.location;
                rows.push_back(std::move(row));
            }
        };
        gen_dups(0, kDup0);
        gen_dups(1, kDup1);

        std::shuffle(rows.begin(), rows.end(), rng);

        std::ostringstream out;
        out << "id,keyword,location,text,target\n";
        std::int64_t id = 0;
        for (const auto& row : rows) {
            id += 1 + static_cast<std::int64_t>(rng() % 3);
            out << id << ',' << csv_field(row.keyword) << ',' << csv_field(row.location) << ','
                << csv_field(row.text) << ',' << row.target << '\n';
        }
        return out.str();
    }();
    return cached;
}

std::string corpus_path() {
    if (const char* env = std::getenv("DTWC_TRAIN_CSV"); env && *env) return env;
    static const std::string path = [] {
        const std::filesystem::path dir{DTWC_TEST_TMP_DIR};
        std::filesystem::create_directories(dir);
        const auto file = dir / "synthetic_train.csv";
        std::ofstream out(file, std::ios::binary | std::ios::trunc);
        out << synthetic_csv();
        return file.string();
    }();
    return path;
}

std::vector<TweetRecord> small_labeled(std::size_t n, std::uint64_t seed) {
    static const std::vector<std::string> pos = {"fire", "flood", "smoke", "damage", "rescue"};
    static const std::vector<std::string> neg = {"coffee", "movie", "garden", "sunny", "picnic"};
    static const std::vector<std::string> mid = {"city", "night", "river", "crowd"};

    std::mt19937_64 rng(seed);
    std::vector<TweetRecord> records;
    records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        const auto& own = label == 1 ? pos : neg;
        std::string text;
        const std::size_t len = 4 + rng() % 3;
        for (std::size_t t = 0; t < len; ++t) {
            if (!text.empty()) text += ' ';
            text += u01(rng) < 0.6 ? pick(rng, own) : pick(rng, mid);
        }
        text += " x" + std::to_string(i); // keep texts unique across rows
        TweetRecord rec;
        rec.id = static_cast<std::int64_t>(i + 1);
        rec.text = std::move(text);
        rec.target = label;
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace dtwc::testfix
