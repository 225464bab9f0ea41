import java.util.*;

public class Task {
    // TODO: tidy up
    static int run(int val, int y) {
        if (y == 0) {
            return val;
        }
        return run(y, val % y);
    }

    public static void main(String[] args) {
        System.out.println(run(84, 323));
    }
}
