/** Browser bootstrap: same-origin service by default, ?api= to override. */

import { Client } from "./api.js";
import { createApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? window.location.origin;
const annotator = params.get("annotator") ?? undefined;

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}
const app = createApp(root, new Client(base), { annotator });
void app.showDashboard();
