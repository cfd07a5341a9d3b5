class Receivers {
    Helper h;

    void run(Helper a) {
        this.local();
        a.work();
        h.next.work();
        a.self().work();
        local();
    }

    void local() {}
}

class Helper {
    Helper next;

    Helper self() { return this; }

    void work() {}
}
