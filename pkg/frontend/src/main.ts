import { ReviewApi } from "./api.js";
import { ReviewStore } from "./state.js";
import { mountApp } from "./ui.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");

const store = new ReviewStore(new ReviewApi());
mountApp(root, store);
void store.load();
