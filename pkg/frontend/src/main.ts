import { StudioClient } from "./client.js";
import { StudioController } from "./controller.js";
import { Session } from "./session.js";
import { StudioView } from "./render.js";

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("service") ?? "";
  const client = new StudioClient(base);
  const attributes = await client.attributes();

  const mount = (session: Session): void => {
    const controller = new StudioController(client, session);
    const view = new StudioView(document, controller, attributes);
    document.body.replaceChildren(view.root, sessionBar(session));
    if (session.sourceImage) view.sourceView.show(session.sourceImage);
    if (session.targetImage) view.targetView.show(session.targetImage);
    if (session.lastResult) view.showResult(session.lastResult);
    view.refreshHistory();
  };

  const sessionBar = (session: Session): HTMLElement => {
    const bar = document.createElement("div");
    bar.id = "session-bar";

    const save = document.createElement("button");
    save.id = "save-session";
    save.textContent = "Save session";
    save.addEventListener("click", () => {
      const blob = new Blob([session.toJSON()], { type: "application/json" });
      const link = document.createElement("a");
      link.href = URL.createObjectURL(blob);
      link.download = "session.json";
      link.click();
      URL.revokeObjectURL(link.href);
    });
    bar.appendChild(save);

    const load = document.createElement("input");
    load.id = "load-session";
    load.type = "file";
    load.accept = "application/json";
    load.addEventListener("change", () => {
      const file = load.files?.[0];
      if (!file) return;
      void file.text().then((text) => mount(Session.fromJSON(text)));
    });
    bar.appendChild(load);

    return bar;
  };

  mount(new Session());
}

void boot();
