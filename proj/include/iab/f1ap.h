#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iab/f1ap_message.h"
#include "iab/ids.h"
#include "iab/packet.h"
#include "iab/topology.h"

namespace iab {

enum class F1State { kIdle, kSetupRequested, kActive, kReleased };
enum class UeState { kDetached, kAttaching, kConnected };
enum class SessionState { kRequested, kEstablished, kReleased };

std::string_view to_string(F1State s);
std::string_view to_string(UeState s);
std::string_view to_string(SessionState s);

struct F1Association {
  NodeId cu;
  NodeId du;
  F1State state = F1State::kIdle;
  Path transport;
  int setup_attempts = 0;
};

// F1-U legs of one UE's data radio bearer.
struct BearerTunnels {
  TunnelKey uplink;    // received by the CU
  TunnelKey downlink;  // received by the serving DU
};

struct UeContext {
  NodeId ue;
  NodeId serving_du;
  NodeId cu;
  UeState state = UeState::kDetached;
  std::optional<BearerTunnels> drb;
};

struct PduSession {
  NodeId mt;
  NodeId upf;
  TunnelKey uplink;    // received by the UPF
  TunnelKey downlink;  // received by the MT
  SessionState state = SessionState::kRequested;
};

enum class EntityKind { kF1Association, kUeContext, kPduSession };

std::string_view to_string(EntityKind k);

struct Transition {
  double time = 0.0;
  EntityKind entity = EntityKind::kF1Association;
  NodeId subject;  // DU, UE/MT, or MT respectively
  std::string from;
  std::string to;
  std::string cause;
};

bool transition_allowed(F1State from, F1State to);
bool transition_allowed(UeState from, UeState to);
bool transition_allowed(SessionState from, SessionState to);

// Owns the F1 association, UE context and PDU session state machines. Every
// state change goes through here, is checked against the allowed transition
// set, and is reported to the observer. Message transport lives in the
// simulator.
class ControlPlane {
 public:
  using Observer = std::function<void(const Transition&)>;

  void set_observer(Observer observer) { observer_ = std::move(observer); }

  // Idle -> SetupRequested. A previously failed (Idle) association is reused.
  F1Association& begin_setup(NodeId cu, NodeId du, Path transport, double t);
  void complete_setup(NodeId du, double t);
  // SetupRequested -> Idle.
  void fail_setup(NodeId du, double t, std::string_view cause);
  // Active -> Released. Returns the UEs that were being served by the DU.
  std::vector<NodeId> release(NodeId du, double t, std::string_view cause);

  // Detached -> Attaching. Throws NotCovered / DuNotReady.
  UeContext& begin_attach(NodeId ue, NodeId du, NodeId cu, bool covered,
                          double t);
  void complete_attach(NodeId ue, const BearerTunnels& drb, double t);
  void detach(NodeId ue, double t, std::string_view cause);

  // Throws MtDetached (MT not Connected through a Donor DU) or
  // AlreadyEstablished.
  void check_session_allowed(const Scenario& scenario, NodeId mt) const;
  PduSession& establish_session(const Scenario& scenario, NodeId mt,
                                NodeId upf, TunnelKey uplink,
                                TunnelKey downlink, double t);
  void release_session(NodeId mt, double t, std::string_view cause);

  // Throws NotActive unless the DU's association is Active.
  void check_config_update(NodeId du) const;

  // F1 messages are only deliverable on associations that are neither Idle
  // nor Released.
  bool deliverable(const F1Message& msg) const;

  const F1Association* association(NodeId du) const;
  const UeContext* context(NodeId ue) const;
  const PduSession* session(NodeId mt) const;

  const std::map<NodeId, F1Association>& associations() const {
    return associations_;
  }
  const std::map<NodeId, UeContext>& contexts() const { return contexts_; }
  const std::map<NodeId, PduSession>& sessions() const { return sessions_; }

 private:
  F1Association& must_association(NodeId du);
  UeContext& must_context(NodeId ue);
  void move(F1Association& a, F1State to, double t, std::string_view cause);
  void move(UeContext& c, UeState to, double t, std::string_view cause);
  void move(PduSession& s, SessionState to, double t, std::string_view cause);
  void emit(Transition tr) const;

  Observer observer_;
  std::map<NodeId, F1Association> associations_;
  std::map<NodeId, UeContext> contexts_;
  std::map<NodeId, PduSession> sessions_;
};

}  // namespace iab
