import { startConsole } from "./app.js";

// Same-origin by default; override with ?gateway=http://host:port when
// the console is served from a static file server instead.
const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("gateway") ?? window.location.origin;

const root = document.getElementById("console-root");
if (root) {
  startConsole(root, baseUrl);
}
