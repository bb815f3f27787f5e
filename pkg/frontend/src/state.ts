/**
 * View state: only the latest tick is retained, so hours of streaming
 * hold memory flat, and a refresh rebuilds the whole view from the next
 * message.
 */
import type { ServerMessage, TickMessage } from "./messages.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface ViewState {
  latest: TickMessage | null;
  ticksSeen: number;
  lastError: string | null;
  status: ConnectionStatus;
}

export function initialState(): ViewState {
  return { latest: null, ticksSeen: 0, lastError: null, status: "connecting" };
}

export function applyMessage(state: ViewState, message: ServerMessage): ViewState {
  if (message.type === "error") {
    return { ...state, lastError: message.message };
  }
  return { ...state, latest: message, ticksSeen: state.ticksSeen + 1 };
}

export function applyStatus(state: ViewState, status: ConnectionStatus): ViewState {
  return { ...state, status };
}
