// Wire protocol shared with the simulation bridge: single JSON text records
// with a `type` field. Everything crossing the socket is validated here.

import { z } from "zod";

export const FrameSchema = z.object({
  type: z.literal("frame"),
  t: z.number().finite(),
  z: z.number().finite(),
  J: z.number().finite(),
  m: z.number().finite(),
  z_src: z.number().finite(),
});

export const StatusSchema = z.object({
  type: z.literal("status"),
  running: z.boolean(),
  scenario: z.string(),
});

export const ErrorSchema = z.object({
  type: z.literal("error"),
  reason: z.string(),
});

export const ServerMessageSchema = z.discriminatedUnion("type", [
  FrameSchema,
  StatusSchema,
  ErrorSchema,
]);

export const SetSourceSchema = z.object({
  type: z.literal("set_source"),
  z: z.number().finite(),
});

export const SimpleCommandSchema = z.object({
  type: z.enum(["pause", "resume", "reset"]),
});

export const ClientMessageSchema = z.union([SetSourceSchema, SimpleCommandSchema]);

export type Frame = z.infer<typeof FrameSchema>;
export type Status = z.infer<typeof StatusSchema>;
export type ErrorRecord = z.infer<typeof ErrorSchema>;
export type ServerMessage = z.infer<typeof ServerMessageSchema>;
export type ClientMessage = z.infer<typeof ClientMessageSchema>;

/** Parse one incoming record; returns null on anything malformed. */
export function decodeServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  const result = ServerMessageSchema.safeParse(data);
  return result.success ? result.data : null;
}

/** Serialize an outgoing command, validating first; throws on bad input. */
export function encodeClientMessage(msg: ClientMessage): string {
  return JSON.stringify(ClientMessageSchema.parse(msg));
}
