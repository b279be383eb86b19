#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include "cbai/error.hpp"
#include "cbai/harness.hpp"

namespace cbai {

namespace {

using nlohmann::json;

json error_message(ErrorCode code, const std::string& what) {
    return {{"type", "error"}, {"code", std::string(to_string(code))}, {"message", what}};
}

std::string_view status_name(ConversationStatus s) {
    switch (s) {
        case ConversationStatus::AwaitingQuestion: return "awaiting_question";
        case ConversationStatus::AwaitingSelection: return "awaiting_selection";
        case ConversationStatus::Ended: return "ended";
    }
    return "ended";
}

bool send_all(int fd, std::string_view data) {
    while (!data.empty()) {
        const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
        if (n <= 0) {
            if (n < 0 && errno == EINTR) continue;
            return false;
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

}  // namespace

ServeSession::ServeSession(const EngineConfig& cfg, const FramePredictor* model,
                           std::unique_ptr<LanguageModelProvider> provider, LogSink log)
    : cfg_(cfg),
      sim_(make_simulator(cfg)),
      model_(model),
      provider_(std::move(provider)),
      engine_(*provider_, make_knowledge_base(cfg), cfg.dialogue),
      log_(std::move(log)) {
    cfg_.validate();
}

json ServeSession::snapshot() const {
    const auto& st = engine_.state();
    json history = json::array();
    for (const auto& [q, a] : st.history) history.push_back({{"question", q}, {"answer", a}});
    json j = {
        {"type", "snapshot"},
        {"status", status_name(st.status)},
        {"question", st.current_question},
        {"page", st.current_page},
        {"category", st.category},
        {"selections_used", st.selections_used},
        {"budget", st.budget},
        {"history", history},
        {"transcript", format_transcript(engine_.transcript())},
    };
    if (st.status == ConversationStatus::AwaitingSelection) j["labels"] = engine_.option_labels();
    return j;
}

json ServeSession::keywords_message() const {
    const auto& st = engine_.state();
    json options = json::array();
    for (const auto& page : st.keyword_pages) {
        for (const auto& k : page) options.push_back(k);
    }
    return {
        {"type", "keywords"},
        {"question", st.current_question},
        {"category", st.category},
        {"from_knowledge_base", st.from_knowledge_base},
        {"options", options},
        {"page", st.current_page},
        {"labels", engine_.option_labels()},
    };
}

std::vector<json> ServeSession::attend(std::size_t stimulus) {
    std::vector<json> out;
    if (engine_.state().status != ConversationStatus::AwaitingSelection) {
        out.push_back(error_message(ErrorCode::InvalidState, "no options are displayed"));
        return out;
    }
    if (stimulus >= sim_.codebook.num_stimuli()) {
        out.push_back(error_message(ErrorCode::BadStimulusId, "stimulus out of range"));
        return out;
    }
    const std::string label = "serve/trial/" + std::to_string(trial_counter_++);
    const TrialLogSink trace = [&out](const TrialLogRecord& r) {
        out.push_back({{"type", "trace"}, {"frame", r.frame_index}, {"bit", r.bit}, {"accuracies", r.accuracies}});
    };
    const DecisionOutcome o = decode_trial(sim_, model_, cfg_.decoder, stimulus, cfg_.seed, label, trace);
    out.push_back({
        {"type", "decision"},
        {"stimulus", o.stimulus},
        {"attended", stimulus},
        {"kind", o.kind == DecisionKind::Timeout ? "timeout" : "selected"},
        {"frames", o.frames_to_decision},
        {"selection_time_ms", o.selection_time_ms()},
        {"wall_time_ms", o.wall_time_ms()},
    });
    if (log_) log_("decision stimulus=" + std::to_string(o.stimulus) + " frames=" + std::to_string(o.frames_to_decision));

    Action action;
    try {
        action = engine_.apply_selection(Selection::from_stimulus(o.stimulus));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::InvalidIndex) throw;
        out.push_back(error_message(e.code(), e.what()));
        out.push_back(keywords_message());
        return out;
    }
    switch (action.kind) {
        case ActionKind::RepageOnly:
            out.push_back(keywords_message());
            break;
        case ActionKind::Answer:
        case ActionKind::EndScenario:
            out.push_back({{"type", "answer"}, {"text", action.text}});
            break;
    }
    if (action.ended) {
        out.push_back({{"type", "end"},
                       {"reason", action.kind == ActionKind::EndScenario && o.stimulus == cfg_.decoder.finished_stimulus
                                      ? "finished"
                                      : "budget"},
                       {"transcript", format_transcript(engine_.transcript())}});
    }
    if (log_) log_(std::string("status ") + std::string(status_name(engine_.state().status)));
    return out;
}

std::vector<json> ServeSession::handle(const json& message) {
    try {
        if (!message.is_object() || !message.contains("type")) {
            return {error_message(ErrorCode::ParseError, "message needs a type")};
        }
        const std::string type = message.at("type").get<std::string>();
        if (log_) log_("recv " + type);
        if (type == "snapshot") return {snapshot()};
        if (type == "question") {
            engine_.ingest_question(message.at("text").get<std::string>());
            return {keywords_message()};
        }
        if (type == "attend") return attend(message.at("stimulus").get<std::size_t>());
        if (type == "end") {
            return {{{"type", "end"}, {"reason", "client"}, {"transcript", format_transcript(engine_.transcript())}}};
        }
        return {error_message(ErrorCode::ParseError, "unknown message type " + type)};
    } catch (const Error& e) {
        return {error_message(e.code(), e.what())};
    } catch (const json::exception& e) {
        return {error_message(ErrorCode::ParseError, e.what())};
    }
}

std::vector<json> ServeSession::handle_line(std::string_view line) {
    json message;
    try {
        message = json::parse(line);
    } catch (const json::exception& e) {
        return {error_message(ErrorCode::ParseError, e.what())};
    }
    return handle(message);
}

// ---- server ----------------------------------------------------------------

ServeServer::ServeServer(SessionFactory factory, LogSink log) : factory_(std::move(factory)), log_(std::move(log)) {}

ServeServer::~ServeServer() {
    stop();
    for (auto& t : workers_) {
        if (t.joinable()) t.join();
    }
    if (listen_fd_ >= 0) ::close(listen_fd_);
}

std::uint16_t ServeServer::bind(std::uint16_t port) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw Error(ErrorCode::BindFailure, std::strerror(errno));
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 16) != 0) {
        const std::string why = std::strerror(errno);
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw Error(ErrorCode::BindFailure, "port " + std::to_string(port) + ": " + why);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    const std::uint16_t bound = ntohs(addr.sin_port);
    if (log_) log_("listening on 127.0.0.1:" + std::to_string(bound));
    return bound;
}

void ServeServer::run() {
    if (listen_fd_ < 0) throw Error(ErrorCode::InvalidState, "server is not bound");
    while (!stopping_) {
        pollfd p{listen_fd_, POLLIN, 0};
        if (::poll(&p, 1, 100) <= 0) continue;
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) continue;
        std::lock_guard lock(mutex_);
        client_fds_.push_back(fd);
        workers_.emplace_back([this, fd] { serve_connection(fd); });
    }
    std::vector<std::thread> workers;
    {
        std::lock_guard lock(mutex_);
        workers.swap(workers_);
    }
    for (auto& t : workers) t.join();
}

void ServeServer::stop() {
    stopping_ = true;
    std::lock_guard lock(mutex_);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
}

void ServeServer::serve_connection(int fd) {
    if (log_) log_("connection opened");
    std::unique_ptr<ServeSession> session;
    try {
        session = factory_(log_);
    } catch (const Error& e) {
        send_all(fd, error_message(e.code(), e.what()).dump() + "\n");
    }
    bool open = session && send_all(fd, session->snapshot().dump() + "\n");
    std::string buffer;
    char chunk[4096];
    while (open && !stopping_) {
        const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n <= 0) {
            if (n < 0 && errno == EINTR) continue;
            break;
        }
        buffer.append(chunk, static_cast<std::size_t>(n));
        std::size_t nl;
        while (open && (nl = buffer.find('\n')) != std::string::npos) {
            const std::string line = buffer.substr(0, nl);
            buffer.erase(0, nl + 1);
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            for (const auto& reply : session->handle_line(line)) {
                open = send_all(fd, reply.dump() + "\n") && open;
                if (reply.at("type") == "end") open = false;
            }
        }
    }
    {
        std::lock_guard lock(mutex_);
        client_fds_.erase(std::remove(client_fds_.begin(), client_fds_.end(), fd), client_fds_.end());
    }
    ::close(fd);
    if (log_) log_("connection closed");
}

}  // namespace cbai
