/**
 * Backend selection: prefer the WASM backend (an order of magnitude
 * faster than the pure-JS CPU backend for recurrent nets), fall back
 * to whatever tfjs picks if WASM is unavailable.
 */

import * as tf from "@tensorflow/tfjs";
import "@tensorflow/tfjs-backend-wasm";

let ready: Promise<string> | null = null;

export function ensureBackend(): Promise<string> {
  if (ready === null) {
    ready = (async () => {
      try {
        await tf.setBackend("wasm");
      } catch {
        // fall through to the default backend
      }
      await tf.ready();
      return tf.getBackend();
    })();
  }
  return ready;
}
