import { AnnotationApi } from "./api.js";
import { App } from "./view.js";

const params = new URLSearchParams(window.location.search);
const annotator = params.get("annotator") ?? "anon";
const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

const app = new App(root, new AnnotationApi(""), annotator);
void app.start();
