import type { FetchLike } from "../src/client.js";

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

export interface FetchStub {
  fetch: FetchLike;
  calls: RecordedCall[];
}

type Responder = (call: RecordedCall) => Response;

/** Fetch stub that records calls and answers from a responder. */
export function stubFetch(respond: Responder): FetchStub {
  const calls: RecordedCall[] = [];
  const impl: FetchLike = async (url, init) => {
    const call: RecordedCall = {
      url,
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(init.body as string) : undefined,
    };
    calls.push(call);
    return respond(call);
  };
  return { fetch: impl, calls };
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

/** Fetch stub that fails the test if any request goes out. */
export function forbiddenFetch(): FetchLike {
  return async (url) => {
    throw new Error(`unexpected network call to ${url}`);
  };
}
