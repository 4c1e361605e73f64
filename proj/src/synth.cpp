#include "monah/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "monah/features.hpp"
#include "monah/segmentation.hpp"
#include "monah/util.hpp"

namespace monah {

SynthSignal SynthSignal::defaults() { return {0.5, 0.25, 0.2, 0.4, 0.8}; }

SynthSignal SynthSignal::scaled(double k) const {
  return {actions * k, semantics * k, prosody * k, mimicry * k, history * k};
}

namespace {

using Rng = std::mt19937_64;

enum Stream : std::uint64_t { kMeta = 0, kTalk, kEvents, kAu, kTone };

Rng stream_rng(std::uint64_t seed, std::size_t session, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(session), static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

const std::vector<std::string> kFiller{
    "i",     "you",    "the",   "a",     "and",    "to",    "it",     "that",    "of",     "so",
    "in",    "my",     "me",    "just",  "well",   "um",    "uh",     "like",    "know",   "think",
    "feel",  "been",   "about", "your",  "there",  "this",  "with",   "for",     "at",     "on",
    "right", "mm",     "yeah",  "then",  "time",   "day",   "week",   "doctor",  "just",   "little",
    "bit",   "since",  "when",  "take",  "taking", "medicine", "sleep", "eat",   "work",   "morning",
    "night", "family", "back",  "head",  "chest",  "really", "quite",  "usually", "maybe",  "now"};
const std::vector<std::string> kOpenStarts{"what", "how", "why", "when", "tell", "describe"};
const std::vector<std::string> kClosedStarts{"do", "is", "are", "have", "can", "did", "would"};

struct Vocab {
  std::vector<std::string> positive, negative;
};

const Vocab& vocab() {
  static const Vocab v = [] {
    Vocab out;
    for (const auto& [w, val] : Lexicon::builtin().entries()) (val > 0 ? out.positive : out.negative).push_back(w);
    return out;
  }();
  return v;
}

template <class T>
const T& pick(const std::vector<T>& xs, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, xs.size() - 1);
  return xs[d(rng)];
}

double round_to(double x, double step) { return std::round(x / step) * step; }

struct SessionPlan {
  std::size_t index;
  bool positive;
  SessionMeta meta;
};

void talk(const SynthConfig& cfg, const SessionPlan& plan, Session& out) {
  Rng rng = stream_rng(cfg.seed, plan.index, kTalk);
  const double e = plan.positive ? 1.0 : 0.0;
  const auto& sig = cfg.signal;
  std::normal_distribution<double> turns_d(cfg.mean_turns, cfg.sd_turns);
  const int n_turns = std::max(cfg.min_turns, static_cast<int>(std::lround(turns_d(rng))));

  const double var = cfg.sd_words * cfg.sd_words;
  const double shape = cfg.mean_words * cfg.mean_words / std::max(var - cfg.mean_words, 1e-9);
  const double scale = std::max(var - cfg.mean_words, 1e-9) / cfg.mean_words;
  std::gamma_distribution<double> lambda_d(shape, scale);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  const double mix = std::clamp(0.2 + 0.6 * sig.mimicry * e, 0.0, 0.95);
  const double p_pos = 0.05 * (1.0 + sig.semantics * e);
  const double p_neg = 0.04 / (1.0 + sig.semantics * e);
  const std::array<double, 2> base_rate{2.6 * std::exp(0.15 * z(rng)), 2.3 * std::exp(0.15 * z(rng))};
  const std::array<double, 2> delay_mu{std::log(420.0), std::log(520.0) - 0.35 * sig.prosody * e};

  std::vector<WordToken> words;
  Millis t = 0;
  double last_doctor_rate = base_rate[0];
  for (int i = 0; i < n_turns; ++i) {
    const Speaker spk = i % 2 == 0 ? Speaker::Doctor : Speaker::Patient;
    const auto k = index(spk);
    const double lambda = lambda_d(rng);
    int n_words = 1;
    if (lambda > 1e-9) n_words = std::poisson_distribution<int>(lambda)(rng);
    n_words = std::clamp(n_words, 1, 150);
    const double indep = base_rate[k] * std::exp(0.3 * z(rng));
    double rate = indep;
    if (spk == Speaker::Patient) rate = std::exp((1.0 - mix) * std::log(indep) + mix * std::log(last_doctor_rate));
    else last_doctor_rate = rate;
    const double gap = std::exp(delay_mu[k] + 0.7 * z(rng));
    if (i > 0) t += static_cast<Millis>(std::lround(std::min(gap, 6000.0)));

    const double slot = 1000.0 / rate;
    for (int w = 0; w < n_words; ++w) {
      const double c = u(rng);
      std::string text;
      if (w == 0 && c < 0.12) text = pick(kOpenStarts, rng);
      else if (w == 0 && c < 0.24) text = pick(kClosedStarts, rng);
      else if (c < p_pos) text = pick(vocab().positive, rng);
      else if (c < p_pos + p_neg) text = pick(vocab().negative, rng);
      else text = pick(kFiller, rng);
      const Millis start = t + static_cast<Millis>(std::lround(w * slot));
      const Millis end = start + std::max<Millis>(1, static_cast<Millis>(std::lround(slot * 0.85)));
      words.push_back({std::move(text), start, end, spk});
    }
    t = words.back().end_ms;
  }
  out.turns = segment(words);
  compute_delays(out.turns);
}

void actions(const SynthConfig& cfg, const SessionPlan& plan, Session& out, Millis total) {
  Rng rng = stream_rng(cfg.seed, plan.index, kEvents);
  const double e = plan.positive ? 1.0 : 0.0;
  const double boost = 1.0 + cfg.signal.actions * e;
  // Per-minute rates in EventKind order.
  const std::array<double, 6> rate{0.4 * (1.0 + 0.3 * cfg.signal.actions * e), 1.6 * boost, 0.5, 1.2 * boost, 0.8 * boost,
                                  0.6 / boost};
  const double minutes = static_cast<double>(total) / 60000.0;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<FeatureEvent> events;
  for (auto s : kSpeakers) {
    for (std::size_t k = 0; k < rate.size(); ++k) {
      const int n = std::poisson_distribution<int>(std::max(rate[k] * minutes, 1e-6))(rng);
      for (int i = 0; i < n; ++i) {
        const auto dur = static_cast<Millis>(400 + std::lround(2100 * u(rng)));
        const auto start = static_cast<Millis>(std::lround(u(rng) * static_cast<double>(std::max<Millis>(total - dur, 0))));
        events.push_back({kEventKinds[k], s, start, start + dur});
      }
    }
  }
  std::stable_sort(events.begin(), events.end(), [](const FeatureEvent& a, const FeatureEvent& b) {
    return a.start_ms < b.start_ms;
  });
  out.events = std::move(events);
}

void action_units(const SynthConfig& cfg, const SessionPlan& plan, Session& out, Millis total) {
  Rng rng = stream_rng(cfg.seed, plan.index, kAu);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<AuFrame> frames;
  for (auto s : kSpeakers) {
    for (auto au : kAuIds) {
      const double mu = 0.6 + 0.3 * static_cast<double>(index(s)) + 0.15 * static_cast<double>(au);
      double x = mu;
      for (Millis ts = 0; ts <= total; ts += cfg.au_interval_ms) {
        x = std::clamp(mu + 0.85 * (x - mu) + 0.35 * z(rng), 0.0, 5.0);
        const double v = round_to(x, 0.01);
        frames.push_back({s, ts, au, v, v >= 0.5});
      }
    }
  }
  out.au_frames = std::move(frames);
}

void tones(const SynthConfig& cfg, const SessionPlan& plan, Session& out) {
  Rng rng = stream_rng(cfg.seed, plan.index, kTone);
  const double e = plan.positive ? 1.0 : 0.0;
  const double mix = std::clamp(0.2 + 0.6 * cfg.signal.mimicry * e, 0.0, 0.95);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<ToneFrame> frames;
  std::array<double, 3> last_doctor{0.35, 0.2, 0.1};
  for (const auto& turn : out.turns) {
    std::array<double, 3> v{0.35 + 0.15 * z(rng), 0.2 + 0.1 * z(rng), 0.1 + 0.08 * z(rng)};
    if (turn.speaker == Speaker::Patient)
      for (std::size_t c = 0; c < 3; ++c) v[c] = (1.0 - mix) * v[c] + mix * last_doctor[c];
    for (auto& x : v) x = round_to(std::clamp(x, 0.0, 1.0), 0.001);
    if (turn.speaker == Speaker::Doctor) last_doctor = v;
    frames.push_back({turn.speaker, turn.start_ms, turn.end_ms, v[0], v[1], v[2]});
  }
  out.tone_frames = std::move(frames);
}

}  // namespace

std::vector<Session> synth_sessions(const SynthConfig& cfg) {
  Rng master(cfg.seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> leniency(std::max<std::size_t>(cfg.n_assessors, 1));
  for (auto& l : leniency) l = z(master);
  const double base_logit = std::log(cfg.positive_rate / (1.0 - cfg.positive_rate));

  // 2021-01-04T09:00:00Z
  const Timestamp epoch{std::chrono::milliseconds(1609750800000LL)};
  std::vector<SessionPlan> plans(cfg.n_sessions);
  for (std::size_t i = 0; i < cfg.n_sessions; ++i) {
    Rng rng = stream_rng(cfg.seed, i, kMeta);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> who(0, leniency.size() - 1);
    auto& p = plans[i];
    p.index = i;
    auto& m = p.meta;
    m.session_id = "s" + std::string(4 - std::min<std::size_t>(4, std::to_string(i + 1).size()), '0') +
                   std::to_string(i + 1);
    const std::size_t a = who(rng);
    m.assessor_id = "sp" + std::to_string(a + 1);
    m.assessed_at = epoch + std::chrono::hours(24 * static_cast<int>(i)) +
                    std::chrono::minutes(static_cast<int>(u(rng) * 480));
    for (auto s : kSpeakers) {
      m.gender[index(s)] = u(rng) < 0.5 ? Gender::Male : Gender::Female;
      auto& per = m.personality[index(s)];
      for (double* trait : {&per.openness, &per.conscientiousness, &per.extraversion, &per.agreeableness,
                            &per.neuroticism})
        *trait = round_to(100.0 * u(rng), 0.1);
    }
    const double logit = base_logit + cfg.signal.history * leniency[a];
    p.positive = u(rng) < 1.0 / (1.0 + std::exp(-logit));
    const double g = u(rng);
    m.rapport_score = p.positive ? RapportScore::PassPlus
                      : g < 0.15 ? RapportScore::Fail
                      : g < 0.5  ? RapportScore::PassMinus
                                 : RapportScore::Pass;
  }

  std::vector<Session> sessions(cfg.n_sessions);
  parallel_for(cfg.n_sessions, [&](std::size_t i) {
    auto& s = sessions[i];
    s.meta = plans[i].meta;
    talk(cfg, plans[i], s);
    const Millis total = s.turns.empty() ? 0 : s.turns.back().end_ms;
    actions(cfg, plans[i], s, total);
    action_units(cfg, plans[i], s, total);
    tones(cfg, plans[i], s);
  });
  return sessions;
}

std::filesystem::path synth_corpus(const SynthConfig& config, const std::filesystem::path& out) {
  const auto sessions = synth_sessions(config);
  CorpusManifest manifest;
  manifest.root = out;
  manifest.sessions.resize(sessions.size());
  parallel_for(sessions.size(), [&](std::size_t i) {
    const auto& s = sessions[i];
    manifest.sessions[i] = write_session(s, out, fs::path("sessions") / s.meta.session_id);
  });
  const auto path = out / "manifest.json";
  write_manifest(manifest, path);
  return path;
}

}  // namespace monah
