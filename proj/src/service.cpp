#include "quakedrill/service.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "quakedrill/assessment.hpp"
#include "quakedrill/dsl.hpp"
#include "quakedrill/event_log.hpp"

namespace fs = std::filesystem;

namespace quakedrill::service {

long long system_clock_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

int ServiceError::http_status() const noexcept {
    switch (kind_) {
        case Kind::not_found: return 404;
        case Kind::conflict: return 409;
        case Kind::validation: return 422;
    }
    return 500;
}

std::string_view to_string(SessionStatus status) {
    return status == SessionStatus::active ? "active" : "finished";
}

namespace {

[[noreturn]] void not_found(const std::string& code, const std::string& message) {
    throw ServiceError(ServiceError::Kind::not_found, code, message);
}
[[noreturn]] void conflict(const std::string& code, const std::string& message) {
    throw ServiceError(ServiceError::Kind::conflict, code, message);
}
[[noreturn]] void invalid(const std::string& code, const std::string& message) {
    throw ServiceError(ServiceError::Kind::validation, code, message);
}

// Writes `data` and syncs it to disk before returning.
void write_synced(const fs::path& path, std::string_view data, bool append) {
    const int flags = O_WRONLY | O_CREAT | (append ? O_APPEND : O_TRUNC);
    const int fd = ::open(path.c_str(), flags, 0644);
    if (fd < 0) throw std::runtime_error("cannot open " + path.string() + ": " + std::strerror(errno));
    std::size_t done = 0;
    while (done < data.size()) {
        const auto n = ::write(fd, data.data() + done, data.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            const std::string err = std::strerror(errno);
            ::close(fd);
            throw std::runtime_error("cannot write " + path.string() + ": " + err);
        }
        done += static_cast<std::size_t>(n);
    }
    ::fsync(fd);
    ::close(fd);
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const Json& field(const Json& body, const char* key) {
    if (!body.is_object()) invalid("invalid_body", "request body must be a JSON object");
    auto it = body.find(key);
    if (it == body.end()) invalid("missing_field", std::string("missing field '") + key + "'");
    return *it;
}

std::string string_field(const Json& body, const char* key) {
    const auto& v = field(body, key);
    if (!v.is_string()) invalid("invalid_field", std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

std::optional<std::string> optional_string_field(const Json& body, const char* key) {
    if (!body.is_object() || !body.contains(key) || body[key].is_null()) return std::nullopt;
    return string_field(body, key);
}

TestPhase phase_field(const Json& body) {
    const auto text = string_field(body, "phase");
    const auto phase = test_phase_from_string(text);
    if (!phase) invalid("invalid_phase", "phase must be 'pre' or 'post', got '" + text + "'");
    return *phase;
}

std::string format_id(char prefix, long long n, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%0*lld", prefix, width, n);
    return buf;
}

bool is_battery(std::string_view b) {
    return b == batteries::self_efficacy || b == batteries::training_efficacy || b == batteries::engagement;
}

}  // namespace

Service::Service(ServiceConfig config, Clock clock) : config_(std::move(config)), clock_(std::move(clock)) {
    load_scenarios();
    std::error_code ec;
    fs::create_directories(config_.data_dir / "sessions", ec);
    if (ec) throw ConfigError("cannot create data directory " + config_.data_dir.string() + ": " + ec.message());
    load_index();
}

Service::~Service() { stop_sweeper(); }

void Service::load_scenarios() {
    std::error_code ec;
    if (!fs::is_directory(config_.scenario_dir, ec))
        throw ConfigError("scenario directory " + config_.scenario_dir.string() + " does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(config_.scenario_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".drill") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        Scenario scenario;
        try {
            scenario = load_scenario_file(path.string());
        } catch (const std::exception& e) {
            throw ConfigError(path.string() + ": " + e.what());
        }
        const auto report = validate_scenario(scenario);
        if (!report.ok())
            throw ConfigError(path.string() + ": " + report.errors.front().location + ": " +
                              report.errors.front().message);
        if (scenarios_.count(scenario.id))
            throw ConfigError(path.string() + ": scenario id '" + scenario.id + "' already loaded");
        scenarios_.emplace(scenario.id, std::move(scenario));
    }
    if (scenarios_.empty()) throw ConfigError("no .drill scenarios in " + config_.scenario_dir.string());
}

std::vector<std::string> Service::scenario_ids() const {
    std::vector<std::string> ids;
    for (const auto& [id, _] : scenarios_) ids.push_back(id);
    return ids;
}

fs::path Service::log_path(const std::string& session_id) const {
    return config_.data_dir / "sessions" / (session_id + ".log");
}

// ---- index ---------------------------------------------------------------

Json Service::index_json_locked() const {
    Json participants = Json::array();
    for (const auto& id : participant_order_) {
        const auto& p = participants_.at(id);
        participants.push_back({{"id", p.id}, {"group", p.group}, {"metadata", p.metadata}});
    }
    Json sessions = Json::array();
    for (const auto& id : session_order_) {
        const auto& m = sessions_.at(id)->meta;
        sessions.push_back({{"id", m.id},
                            {"participant_id", m.participant_id},
                            {"scenario_id", m.scenario_id},
                            {"log", m.log_file},
                            {"status", to_string(m.status)},
                            {"started_at_ms", m.started_at_ms}});
    }
    Json questionnaires = Json::array();
    for (const auto& q : questionnaires_)
        questionnaires.push_back({{"participant_id", q.participant_id},
                                  {"phase", to_string(q.phase)},
                                  {"battery", q.battery},
                                  {"values", q.values}});
    Json knowledge = Json::array();
    for (const auto& k : knowledge_)
        knowledge.push_back({{"participant_id", k.participant_id},
                             {"phase", to_string(k.phase)},
                             {"aspect", to_string(k.aspect)},
                             {"coder_id", k.coder_id},
                             {"items", k.items}});
    return {{"version", 1},
            {"next_session", next_session_},
            {"next_participant", next_participant_},
            {"participants", participants},
            {"sessions", sessions},
            {"questionnaires", questionnaires},
            {"knowledge", knowledge}};
}

void Service::save_index_locked() const {
    const auto path = config_.data_dir / "index.json";
    const auto tmp = config_.data_dir / "index.json.tmp";
    write_synced(tmp, index_json_locked().dump(2) + "\n", false);
    fs::rename(tmp, path);
}

void Service::load_index() {
    const auto path = config_.data_dir / "index.json";
    if (!fs::exists(path)) {
        std::lock_guard lock(store_mutex_);
        save_index_locked();
        return;
    }
    Json index;
    try {
        index = Json::parse(read_text(path));
        next_session_ = index.at("next_session").get<long long>();
        next_participant_ = index.at("next_participant").get<long long>();
        for (const auto& p : index.at("participants")) {
            Participant participant{p.at("id").get<std::string>(), p.at("group").get<std::string>(),
                                    p.at("metadata").get<std::map<std::string, std::string>>()};
            participant_order_.push_back(participant.id);
            participants_.emplace(participant.id, std::move(participant));
        }
        for (const auto& q : index.at("questionnaires"))
            questionnaires_.push_back({q.at("participant_id").get<std::string>(),
                                       *test_phase_from_string(q.at("phase").get<std::string>()),
                                       q.at("battery").get<std::string>(), q.at("values").get<std::vector<int>>()});
        for (const auto& k : index.at("knowledge")) {
            KnowledgeResponse r;
            r.participant_id = k.at("participant_id").get<std::string>();
            r.phase = *test_phase_from_string(k.at("phase").get<std::string>());
            r.aspect = *knowledge_aspect_from_string(k.at("aspect").get<std::string>());
            r.coder_id = k.at("coder_id").get<int>();
            r.items = k.at("items").get<ItemSet>();
            knowledge_.push_back(std::move(r));
        }
    } catch (const std::exception& e) {
        throw ConfigError("corrupt index " + path.string() + ": " + e.what());
    }

    bool dirty = false;
    for (const auto& s : index.at("sessions")) {
        auto live = std::make_shared<LiveSession>();
        auto& m = live->meta;
        m.id = s.at("id").get<std::string>();
        m.participant_id = s.at("participant_id").get<std::string>();
        m.scenario_id = s.at("scenario_id").get<std::string>();
        m.log_file = s.at("log").get<std::string>();
        m.started_at_ms = s.at("started_at_ms").get<long long>();
        auto it = scenarios_.find(m.scenario_id);
        if (it == scenarios_.end())
            throw ConfigError("session " + m.id + " uses scenario '" + m.scenario_id + "' which is not loaded");
        live->scenario = &it->second;

        const auto file = config_.data_dir / m.log_file;
        std::string text = read_text(file);
        // A record cut short by a crash was never acknowledged; drop it.
        if (!text.empty() && text.back() != '\n') {
            text.erase(text.find_last_of('\n') == std::string::npos ? 0 : text.find_last_of('\n') + 1);
            write_synced(file, text, false);
        }
        try {
            live->state = replay(parse_log(text), *live->scenario);
        } catch (const std::exception& e) {
            throw ConfigError("session " + m.id + ": " + e.what());
        }
        const auto status = live->state.finished ? SessionStatus::finished : SessionStatus::active;
        if (s.at("status").get<std::string>() != to_string(status)) dirty = true;
        m.status = status;
        session_order_.push_back(m.id);
        sessions_.emplace(m.id, std::move(live));
    }
    if (dirty) {
        std::lock_guard lock(store_mutex_);
        save_index_locked();
    }
}

// ---- sessions -----------------------------------------------------------

std::shared_ptr<Service::LiveSession> Service::find_session(const std::string& id) const {
    std::lock_guard lock(store_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) not_found("session_not_found", "no session '" + id + "'");
    return it->second;
}

const Participant& Service::find_participant_locked(const std::string& id) const {
    auto it = participants_.find(id);
    if (it == participants_.end()) not_found("participant_not_found", "no participant '" + id + "'");
    return it->second;
}

long long Service::session_now(const LiveSession& s) const { return clock_() - s.meta.started_at_ms; }

void Service::persist_new_events(LiveSession& s, std::size_t from) {
    if (from >= s.state.log.size()) return;
    std::string text;
    for (std::size_t i = from; i < s.state.log.size(); ++i) text += format_event(s.state.log[i]) + "\n";
    write_synced(config_.data_dir / s.meta.log_file, text, true);
    if (s.state.finished && s.meta.status != SessionStatus::finished) {
        std::lock_guard lock(store_mutex_);
        s.meta.status = SessionStatus::finished;
        save_index_locked();
    }
}

bool Service::catch_up(LiveSession& s) {
    if (s.state.finished) return false;
    const long long delta = session_now(s) - s.state.elapsed_ms;
    if (delta <= 0) return false;
    const auto before = s.state.log.size();
    auto next = advance_time(*s.scenario, s.state, delta);
    SessionState previous = std::move(s.state);
    s.state = std::move(next);
    try {
        persist_new_events(s, before);
    } catch (...) {
        s.state = std::move(previous);
        throw;
    }
    return s.state.log.size() != before;
}

Json Service::state_json(const LiveSession& s) const {
    const auto& st = s.state;
    Json node = nullptr;
    Json options = Json::array();
    if (st.current_node) {
        const auto* n = s.scenario->find_node(*st.current_node);
        const auto* wp = s.scenario->find_waypoint(n->waypoint);
        node = {{"id", n->id},
                {"prompt", n->prompt},
                {"waypoint",
                 {{"id", wp->id},
                  {"label", wp->label},
                  {"position", {wp->position.x, wp->position.y, wp->position.z}}}}};
        for (const auto& o : n->options) options.push_back({{"id", o.id}, {"label", o.label}});
    }
    const auto remaining = timeout_remaining_ms(*s.scenario, st);
    return {{"session_id", s.meta.id},
            {"participant_id", s.meta.participant_id},
            {"scenario_id", s.meta.scenario_id},
            {"status", to_string(st.finished ? SessionStatus::finished : SessionStatus::active)},
            {"elapsed_ms", st.elapsed_ms},
            {"node", node},
            {"options", options},
            {"timeout_remaining_ms", remaining ? Json(*remaining) : Json(nullptr)},
            {"event_count", st.log.size()},
            {"last_event", st.log.empty() ? Json(nullptr) : to_json(st.log.back())},
            {"assessment", st.finished ? Json("/sessions/" + s.meta.id + "/assessment") : Json(nullptr)}};
}

Json Service::create_participant(const Json& body) {
    auto id = optional_string_field(body, "id");
    const auto group = string_field(body, "group");
    if (group != "staff" && group != "visitor")
        invalid("invalid_group", "group must be 'staff' or 'visitor', got '" + group + "'");
    std::map<std::string, std::string> metadata;
    if (body.contains("metadata") && !body["metadata"].is_null()) {
        if (!body["metadata"].is_object()) invalid("invalid_field", "field 'metadata' must be an object");
        for (const auto& [k, v] : body["metadata"].items()) metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }

    std::lock_guard lock(store_mutex_);
    if (id) {
        if (id->empty()) invalid("invalid_field", "participant id must not be empty");
        if (participants_.count(*id)) conflict("participant_exists", "participant '" + *id + "' already exists");
    } else {
        do id = format_id('P', next_participant_++, 4);
        while (participants_.count(*id));
    }
    Participant p{*id, group, std::move(metadata)};
    participants_.emplace(p.id, p);
    participant_order_.push_back(p.id);
    save_index_locked();
    return {{"id", p.id}, {"group", p.group}, {"metadata", p.metadata}};
}

Json Service::create_session(const Json& body) {
    const auto scenario_id = string_field(body, "scenario_id");
    const auto participant_id = string_field(body, "participant_id");
    auto sc = scenarios_.find(scenario_id);
    if (sc == scenarios_.end()) not_found("scenario_not_found", "no scenario '" + scenario_id + "'");

    auto live = std::make_shared<LiveSession>();
    std::lock_guard lock(store_mutex_);
    find_participant_locked(participant_id);
    auto& m = live->meta;
    do m.id = format_id('s', next_session_++, 6);
    while (sessions_.count(m.id));
    m.participant_id = participant_id;
    m.scenario_id = scenario_id;
    m.log_file = "sessions/" + m.id + ".log";
    m.started_at_ms = clock_();
    live->scenario = &sc->second;
    live->state = start_session(sc->second, participant_id);

    // The log goes down before the index names it, so a listed session always has a log.
    write_synced(config_.data_dir / m.log_file, format_log(live->state.log), false);
    sessions_.emplace(m.id, live);
    session_order_.push_back(m.id);
    save_index_locked();
    return state_json(*live);
}

Json Service::get_state(const std::string& session_id) {
    auto s = find_session(session_id);
    std::lock_guard lock(s->mutex);
    catch_up(*s);
    return state_json(*s);
}

Json Service::post_choice(const std::string& session_id, const Json& body) {
    auto s = find_session(session_id);
    const auto option_id = string_field(body, "option_id");
    const auto node_id = optional_string_field(body, "node_id");

    std::lock_guard lock(s->mutex);
    catch_up(*s);
    const auto& st = s->state;
    if (st.finished) conflict("session_finished", "session '" + session_id + "' has finished");
    if (node_id && *node_id != *st.current_node)
        conflict("stale_node", "choice was made at node '" + *node_id + "' but the session is at '" +
                                   *st.current_node + "'");
    const auto* node = s->scenario->find_node(*st.current_node);
    if (!node->find_option(option_id)) {
        const bool elsewhere = std::any_of(s->scenario->nodes.begin(), s->scenario->nodes.end(),
                                           [&](const DecisionNode& n) { return n.find_option(option_id); });
        if (elsewhere)
            conflict("stale_option", "option '" + option_id + "' is not offered at node '" + node->id + "'");
        invalid("unknown_option", "scenario has no option '" + option_id + "'");
    }

    const auto before = st.log.size();
    auto result = choose(*s->scenario, st, option_id);
    SessionState previous = std::move(s->state);
    s->state = std::move(result.state);
    try {
        persist_new_events(*s, before);
    } catch (...) {
        s->state = std::move(previous);
        throw;
    }
    return {{"color", to_string(result.color)}, {"option_id", option_id}, {"state", state_json(*s)}};
}

Json Service::get_assessment(const std::string& session_id) {
    auto s = find_session(session_id);
    std::lock_guard lock(s->mutex);
    catch_up(*s);
    if (!s->state.finished) conflict("session_active", "session '" + session_id + "' has not finished");
    const auto log = read_log_file(config_.data_dir / s->meta.log_file);
    return to_json(build_report(log, *s->scenario, session_id));
}

int Service::sweep() {
    std::vector<std::shared_ptr<LiveSession>> live;
    {
        std::lock_guard lock(store_mutex_);
        for (const auto& [_, s] : sessions_) live.push_back(s);
    }
    int changed = 0;
    for (auto& s : live) {
        std::lock_guard lock(s->mutex);
        if (s->state.finished) continue;
        const auto remaining = timeout_remaining_ms(*s->scenario, s->state);
        if (!remaining || session_now(*s) < s->state.elapsed_ms + *remaining) continue;
        if (catch_up(*s)) ++changed;
    }
    return changed;
}

void Service::start_sweeper(int period_ms) {
    stop_sweeper();
    {
        std::lock_guard lock(sweeper_mutex_);
        sweeper_stop_ = false;
    }
    sweeper_ = std::thread([this, period_ms] {
        std::unique_lock lock(sweeper_mutex_);
        while (!sweeper_cv_.wait_for(lock, std::chrono::milliseconds(period_ms), [this] { return sweeper_stop_; })) {
            lock.unlock();
            try {
                sweep();
            } catch (const std::exception& e) {
                std::fprintf(stderr, "sweep failed: %s\n", e.what());
            }
            lock.lock();
        }
    });
}

void Service::stop_sweeper() {
    {
        std::lock_guard lock(sweeper_mutex_);
        sweeper_stop_ = true;
    }
    sweeper_cv_.notify_all();
    if (sweeper_.joinable()) sweeper_.join();
}

// ---- questionnaires and checklists ---------------------------------------

Json Service::submit_questionnaire(const std::string& participant_id, const Json& body) {
    const auto phase = phase_field(body);
    const auto battery = string_field(body, "battery");
    if (!is_battery(battery))
        invalid("invalid_battery", "battery must be self_efficacy, training_efficacy or engagement");
    const auto& raw = field(body, "values");
    if (!raw.is_array()) invalid("invalid_field", "field 'values' must be an array");
    std::vector<int> values;
    for (const auto& v : raw) {
        if (!v.is_number_integer()) invalid("invalid_value", "questionnaire values must be integers");
        const auto x = v.get<long long>();
        if (x < -3 || x > 3) invalid("value_out_of_range", "value " + std::to_string(x) + " is outside -3..3");
        values.push_back(static_cast<int>(x));
    }
    const std::size_t expected = battery == batteries::self_efficacy ? 6 : 1;
    if (values.size() != expected)
        invalid("wrong_statement_count", battery + " takes " + std::to_string(expected) + " value(s), got " +
                                             std::to_string(values.size()));
    if (battery != batteries::self_efficacy && phase == TestPhase::pre)
        invalid("post_only_battery", battery + " is collected only after training");

    std::lock_guard lock(store_mutex_);
    find_participant_locked(participant_id);
    QuestionnaireRecord record{participant_id, phase, battery, values};
    auto it = std::find_if(questionnaires_.begin(), questionnaires_.end(), [&](const QuestionnaireRecord& q) {
        return q.participant_id == participant_id && q.phase == phase && q.battery == battery;
    });
    if (it != questionnaires_.end()) *it = record;
    else questionnaires_.push_back(record);
    save_index_locked();
    return {{"participant_id", participant_id}, {"phase", to_string(phase)}, {"battery", battery}, {"values", values}};
}

Json Service::submit_knowledge(const std::string& participant_id, const Json& body) {
    KnowledgeResponse r;
    r.participant_id = participant_id;
    r.phase = phase_field(body);
    const auto aspect_text = string_field(body, "aspect");
    const auto aspect = knowledge_aspect_from_string(aspect_text);
    if (!aspect) invalid("invalid_aspect", "unknown knowledge aspect '" + aspect_text + "'");
    r.aspect = *aspect;
    const auto& coder = field(body, "coder_id");
    if (!coder.is_number_integer() || coder.get<long long>() < 1 || coder.get<long long>() > 3)
        invalid("invalid_coder", "coder_id must be 1, 2 or 3");
    r.coder_id = coder.get<int>();
    const auto& items = field(body, "items");
    if (!items.is_array()) invalid("invalid_field", "field 'items' must be an array");
    for (const auto& item : items) {
        if (!item.is_string()) invalid("invalid_item", "checklist items must be strings");
        r.items.insert(item.get<std::string>());
    }
    try {
        check_items(r.aspect, r.items);
    } catch (const KnowledgeError& e) {
        invalid("invalid_item", e.what());
    }

    std::lock_guard lock(store_mutex_);
    find_participant_locked(participant_id);
    auto it = std::find_if(knowledge_.begin(), knowledge_.end(), [&](const KnowledgeResponse& k) {
        return k.participant_id == r.participant_id && k.phase == r.phase && k.aspect == r.aspect &&
               k.coder_id == r.coder_id;
    });
    if (it != knowledge_.end()) *it = r;
    else knowledge_.push_back(r);
    save_index_locked();
    return {{"participant_id", participant_id},
            {"phase", to_string(r.phase)},
            {"aspect", to_string(r.aspect)},
            {"coder_id", r.coder_id},
            {"items", r.items}};
}

// ---- analytics -----------------------------------------------------------

std::vector<stats::CohortRecord> Service::cohort_records(std::vector<std::string>* notes) const {
    std::lock_guard lock(store_mutex_);
    std::vector<stats::CohortRecord> records;
    auto note = [&](const std::string& text) {
        if (notes) notes->push_back(text);
    };
    const struct {
        KnowledgeAspect aspect;
        std::string_view measure;
    } aspects[] = {
        {KnowledgeAspect::during_indoor, stats::measures::knowledge_during_indoor},
        {KnowledgeAspect::after_indoor, stats::measures::knowledge_after_indoor},
        {KnowledgeAspect::after_outdoor, stats::measures::knowledge_after_outdoor},
    };
    auto questionnaire = [&](const std::string& pid, TestPhase phase, std::string_view battery) {
        const QuestionnaireRecord* found = nullptr;
        for (const auto& q : questionnaires_)
            if (q.participant_id == pid && q.phase == phase && q.battery == battery) found = &q;
        return found;
    };

    for (const auto& pid : participant_order_) {
        const auto& p = participants_.at(pid);
        for (const auto& [aspect, measure] : aspects) {
            std::optional<double> scores[2];
            bool any = false;
            for (const auto phase : {TestPhase::pre, TestPhase::post}) {
                std::vector<KnowledgeResponse> coders;
                for (const auto& k : knowledge_)
                    if (k.participant_id == pid && k.aspect == aspect && k.phase == phase) coders.push_back(k);
                any = any || !coders.empty();
                if (coders.size() == 3)
                    scores[phase == TestPhase::post] = score_knowledge(aspect, merge_coders(coders)).score;
            }
            if (scores[0] && scores[1])
                records.push_back({pid, p.group, std::string(measure), scores[0], scores[1]});
            else if (any)
                note("participant " + pid + " left out of " + std::string(measure) +
                     ": needs three coder checklists at both pre and post");
        }

        const auto* se_pre = questionnaire(pid, TestPhase::pre, batteries::self_efficacy);
        const auto* se_post = questionnaire(pid, TestPhase::post, batteries::self_efficacy);
        if (se_pre && se_post) {
            for (int i = 0; i < 6; ++i)
                records.push_back({pid, p.group, stats::measures::self_efficacy_item(i + 1),
                                   double(se_pre->values[i]), double(se_post->values[i])});
        } else if (se_pre || se_post) {
            note("participant " + pid + " left out of self_efficacy: needs the battery at both pre and post");
        }
        for (const auto battery : {batteries::training_efficacy, batteries::engagement})
            if (const auto* q = questionnaire(pid, TestPhase::post, battery))
                records.push_back({pid, p.group, std::string(battery), std::nullopt, double(q->values[0])});
    }
    return records;
}

Json Service::get_cohort_analysis(const std::optional<std::string>& group, const std::optional<std::string>& measure) {
    if (group && *group != "staff" && *group != "visitor" && *group != "all")
        invalid("invalid_group", "group must be staff, visitor or all");
    static const std::set<std::string, std::less<>> known = {
        std::string(stats::measures::knowledge_during_indoor), std::string(stats::measures::knowledge_after_indoor),
        std::string(stats::measures::knowledge_after_outdoor), std::string(stats::measures::self_efficacy),
        std::string(stats::measures::training_efficacy),       std::string(stats::measures::engagement)};
    if (measure && !known.count(*measure)) invalid("invalid_measure", "unknown measure '" + *measure + "'");

    std::vector<std::string> notes;
    const auto records = cohort_records(&notes);
    const bool paired = std::any_of(records.begin(), records.end(), [](const auto& r) { return r.pre && r.post; });
    if (!paired) invalid("no_paired_data", "no participant has paired pre and post data");

    stats::CohortTable table;
    try {
        table = stats::cohort_analysis(records);
    } catch (const stats::CohortError& e) {
        invalid("cohort_invalid", e.what());
    }
    auto keep = [&](const std::string& g, const std::string& m) {
        return (!group || g == *group) && (!measure || m == *measure);
    };
    std::erase_if(table.rows, [&](const auto& r) { return !keep(r.group, r.measure); });
    std::erase_if(table.ratings, [&](const auto& r) { return !keep(r.group, r.measure); });
    table.notes.insert(table.notes.begin(), notes.begin(), notes.end());
    return stats::to_json(table);
}

}  // namespace quakedrill::service
