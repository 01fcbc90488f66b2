import { mount } from "./app.js";

mount(document.getElementById("app") as HTMLElement);
